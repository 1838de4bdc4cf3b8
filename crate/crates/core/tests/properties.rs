use behavioral_comm::distortion::{distortion_closed_best_response, tilted_joint_mass};
use behavioral_comm::equilibrium::stackelberg_solve;
use behavioral_comm::mc::mc_distortion;
use behavioral_comm::prospect::{continuous_pt, discrete_pt_karmarkar, discretize};
use behavioral_comm::{
    AgentProfile, Alpha, GameSpec, GaussianDensity, GaussianTestChannel, LinearDecoder,
    LinearEncoder, McConfig, QuadratureSpec, WeightFunction,
};
use proptest::prelude::*;

fn alpha() -> impl Strategy<Value = f64> {
    0.05f64..=1.0
}

fn variance() -> impl Strategy<Value = f64> {
    0.1f64..10.0
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discretized_mass_is_one(mean in -3.0f64..3.0, var in variance(), n in 1u32..64) {
        let p = GaussianDensity::new(mean, var).unwrap();
        let prospect = discretize(&p, n, 10.0).unwrap();
        prop_assert!((prospect.total_mass() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn unit_exponent_is_plain_expectation(mean in -2.0f64..2.0, var in variance(), n in 1u32..32) {
        let p = GaussianDensity::new(mean, var).unwrap();
        let prospect = discretize(&p, n, 10.0).unwrap();
        let v = |x: f64| x * x - 0.3 * x;
        let w = WeightFunction::karmarkar(1.0).unwrap();
        let pt = discrete_pt_karmarkar(&prospect, v, &w).unwrap();
        let plain = prospect.expectation(v) / prospect.total_mass();
        prop_assert!(close(pt, plain, 1e-10), "{pt} vs {plain}");
    }

    #[test]
    fn shifting_values_shifts_utility(a in alpha(), c in -50.0f64..50.0, n in 1u32..32) {
        let p = GaussianDensity::new(0.4, 1.7).unwrap();
        let prospect = discretize(&p, n, 10.0).unwrap();
        let w = WeightFunction::karmarkar(a).unwrap();
        let v = |x: f64| x * x;
        let base = discrete_pt_karmarkar(&prospect, v, &w).unwrap();
        let shifted = discrete_pt_karmarkar(&prospect, |x| v(x) + c, &w).unwrap();
        prop_assert!(close(shifted, base + c, 1e-12));

        let alpha = Alpha::new(a).unwrap();
        let limit = continuous_pt(&p, v, alpha);
        let limit_shifted = continuous_pt(&p, |x| v(x) + c, alpha);
        prop_assert!(close(limit_shifted, limit + c, 1e-12));
    }

    #[test]
    fn continuous_limit_of_square(mean in -5.0f64..5.0, var in variance(), a in alpha()) {
        let p = GaussianDensity::new(mean, var).unwrap();
        let pt = continuous_pt(&p, |x| x * x, Alpha::new(a).unwrap());
        prop_assert!(close(pt, mean * mean + var / a, 1e-8));
    }

    #[test]
    fn tilting_divides_variances(s2 in variance(), n2 in variance(), k0 in -2.0f64..2.0, k1 in -5.0f64..5.0, a in alpha(), r in -5.0f64..5.0) {
        let ch = GaussianTestChannel::new(s2, n2).unwrap();
        let enc = LinearEncoder::new(k0, k1);
        let alpha = Alpha::new(a).unwrap();
        let post = ch.posterior(&enc, r);
        let tilted = ch.distorted_posterior(&enc, alpha, r);
        prop_assert_eq!(tilted.mean(), post.mean());
        prop_assert!(close(tilted.variance() * a, post.variance(), 1e-15));
        let marg = ch.marginal(&enc);
        let tilted = ch.distorted_marginal(&enc, alpha);
        prop_assert_eq!(tilted.mean(), marg.mean());
        prop_assert!(close(tilted.variance() * a, marg.variance(), 1e-15));
        prop_assert_eq!(ch.distorted_posterior(&enc, Alpha::UNBIASED, r), post);
    }

    #[test]
    fn best_response_distortion_is_monotone(k1 in 0.0f64..5.0, dk in 0.01f64..1.0, a in 0.05f64..0.95, da in 0.01f64..0.05) {
        let ch = GaussianTestChannel::new(1.3, 0.7).unwrap();
        let agent = AgentProfile::new(a).unwrap();
        let sharper = AgentProfile::new(a + da).unwrap();
        let d = distortion_closed_best_response(&ch, k1, &agent);
        prop_assert!(distortion_closed_best_response(&ch, k1 + dk, &agent) < d);
        prop_assert!(distortion_closed_best_response(&ch, k1, &sharper) < d);
        prop_assert!(d > distortion_closed_best_response(&ch, k1, &AgentProfile::unbiased()));
        let scaled = d * a;
        prop_assert!(close(scaled, distortion_closed_best_response(&ch, k1, &AgentProfile::unbiased()), 1e-15));
    }

    #[test]
    fn equilibrium_strategies_ignore_bias(p in 0.01f64..50.0, s2 in variance(), n2 in variance(), at in alpha(), ar in alpha()) {
        let biased = stackelberg_solve(&GameSpec::new(s2, n2, p, at, ar).unwrap()).unwrap();
        let unbiased = stackelberg_solve(&GameSpec::new(s2, n2, p, 1.0, 1.0).unwrap()).unwrap();
        prop_assert_eq!(biased.encoder, unbiased.encoder);
        prop_assert_eq!(biased.decoder, unbiased.decoder);
        let base = s2 * n2 / (p + n2);
        prop_assert!(close(biased.d_t * at, base, 1e-15));
        prop_assert!(close(biased.d_r * ar, base, 1e-15));
        let expected_a = s2.sqrt() * p.sqrt() / (p + n2);
        prop_assert!(close(biased.decoder.a, expected_a, 1e-14));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn normalizer_ignores_encoder(k0 in -3.0f64..3.0, k1 in 0.0f64..10.0, a in 0.1f64..=1.0) {
        let ch = GaussianTestChannel::new(1.0, 1.0).unwrap();
        let alpha = Alpha::new(a).unwrap();
        let closed = ch.alpha_normalizer(alpha);
        let mass = tilted_joint_mass(&ch, &LinearEncoder::new(k0, k1), alpha, &QuadratureSpec::default()).unwrap();
        prop_assert!((mass - closed).abs() <= 1e-6 * closed, "{mass} vs {closed}");
    }

    #[test]
    fn monte_carlo_is_deterministic(seed in any::<u64>(), a in alpha()) {
        let ch = GaussianTestChannel::new(1.0, 1.0).unwrap();
        let enc = LinearEncoder::new(0.2, 0.8);
        let dec = LinearDecoder::new(0.4, 0.1);
        let agent = AgentProfile::new(a).unwrap();
        let cfg = McConfig::new(20_000, seed).unwrap();
        prop_assert_eq!(
            mc_distortion(&ch, &enc, &dec, &agent, &cfg),
            mc_distortion(&ch, &enc, &dec, &agent, &cfg)
        );
    }
}

#[test]
fn standard_error_shrinks_as_root_n() {
    let ch = GaussianTestChannel::new(1.0, 1.0).unwrap();
    let enc = LinearEncoder::new(0.0, 1.0);
    let dec = LinearDecoder::new(0.5, 0.0);
    let agent = AgentProfile::new(0.5).unwrap();
    let se =
        |n: usize| mc_distortion(&ch, &enc, &dec, &agent, &McConfig::new(n, 7).unwrap()).std_err;
    let (a, b, c) = (se(10_000), se(40_000), se(160_000));
    for ratio in [a / b, b / c] {
        assert!((ratio - 2.0).abs() <= 0.2 * 2.0, "ratio {ratio}");
    }
}
