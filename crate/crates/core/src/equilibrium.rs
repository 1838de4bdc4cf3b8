//! Leader–follower equilibrium over linear encoders.
//!
//! The receiver best-responds with the mean of `p_α(S|R)`, which equals the
//! undistorted posterior mean, so its decoder is the classical Wiener
//! estimator whatever `α_R`. That decoder cancels `k₀`, leaving the
//! transmitter a distortion `(1/α_T) σ_S²σ_N² / (k₁²σ_S² + σ_N²)` that falls
//! with `k₁`; the power budget is therefore spent entirely on `k₁`.
//!
//! Optimality is only claimed, and only verified, within the linear class.

use rayon::prelude::*;

use crate::channel::{GaussianTestChannel, LinearEncoder, PowerBudget};
use crate::distortion::{
    distortion_closed, distortion_closed_best_response, distortion_distorted_expectation,
    AgentProfile, LinearDecoder, QuadratureSpec,
};
use crate::error::{Error, Result};

/// Grid points may undercut the closed form by at most this much.
pub const ENCODER_SLACK: f64 = 1e-8;
/// A grid point this much better than the closed form is an implementation bug.
pub const ENCODER_FAILURE: f64 = 1e-6;
/// Decoder excess below this is a verification failure.
pub const DECODER_FAILURE: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameSpec {
    pub channel: GaussianTestChannel,
    pub power: PowerBudget,
    pub tx: AgentProfile,
    pub rx: AgentProfile,
}

impl GameSpec {
    pub fn new(
        sigma_s2: f64,
        sigma_n2: f64,
        power: f64,
        alpha_t: f64,
        alpha_r: f64,
    ) -> Result<Self> {
        Ok(Self {
            channel: GaussianTestChannel::new(sigma_s2, sigma_n2)?,
            power: PowerBudget::new(power)?,
            tx: AgentProfile::new(alpha_t)?,
            rx: AgentProfile::new(alpha_r)?,
        })
    }

    /// `√(P/σ_S²)`, the largest feasible `k₁` with `k₀ = 0`.
    pub fn max_gain(&self) -> f64 {
        (self.power.get() / self.channel.sigma_s2()).sqrt()
    }
}

/// Outcome of a zero-power game: nothing is transmitted and each agent is
/// left with its tilted prior variance `σ_S²/α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateReport {
    pub encoder: LinearEncoder,
    pub decoder: LinearDecoder,
    pub d_t: f64,
    pub d_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub encoder: LinearEncoder,
    pub decoder: LinearDecoder,
    pub d_t: f64,
    pub d_r: f64,
    /// Set only by [`stackelberg_solve_verified`] when both verifiers pass.
    pub verified: bool,
    pub diagnostics: Option<Diagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub encoder: EncoderReport,
    pub decoder: DecoderReport,
}

/// Posterior-mean decoder `a = k₁σ_S²/(k₁²σ_S² + σ_N²)`, `b = -k₀a`. Does not
/// depend on `α_R`.
pub fn best_response_decoder(
    ch: &GaussianTestChannel,
    enc: &LinearEncoder,
    _rx: &AgentProfile,
) -> LinearDecoder {
    let a = ch.posterior_gain(enc);
    LinearDecoder::new(a, -enc.k0 * a)
}

/// Closed-form equilibrium `k₁ = +√(P/σ_S²)`, `k₀ = 0` with the best-response
/// decoder. The mirrored pair with `k₁ < 0` attains the same distortions.
pub fn stackelberg_solve(game: &GameSpec) -> Result<EquilibriumResult> {
    let ch = &game.channel;
    if game.power.get() == 0.0 {
        let encoder = LinearEncoder::new(0.0, 0.0);
        return Err(Error::DegenerateGame(Box::new(DegenerateReport {
            encoder,
            decoder: best_response_decoder(ch, &encoder, &game.rx),
            d_t: distortion_closed_best_response(ch, 0.0, &game.tx),
            d_r: distortion_closed_best_response(ch, 0.0, &game.rx),
        })));
    }
    let encoder = LinearEncoder::new(0.0, game.max_gain());
    let decoder = best_response_decoder(ch, &encoder, &game.rx);
    // σ_S²σ_N²/(P + σ_N²) without round-tripping through k₁²
    let base = ch.sigma_s2() * ch.sigma_n2() / (game.power.get() + ch.sigma_n2());
    Ok(EquilibriumResult {
        encoder,
        decoder,
        d_t: base / game.tx.alpha.get(),
        d_r: base / game.rx.alpha.get(),
        verified: false,
        diagnostics: None,
    })
}

/// [`stackelberg_solve`] followed by both verifiers on their default grids.
pub fn stackelberg_solve_verified(
    game: &GameSpec,
    quad: &QuadratureSpec,
) -> Result<EquilibriumResult> {
    let mut result = stackelberg_solve(game)?;
    let mut grid = gain_grid(game, DEFAULT_GAIN_POINTS);
    grid.extend(offset_grid(game));
    let enc_report = verify_encoder_optimality(game, &grid, quad)?;
    let dec_report = verify_decoder_optimality(game, &result.encoder, &stencil(0.1), quad)?;
    result.verified = enc_report.passed && dec_report.passed;
    result.diagnostics = Some(Diagnostics {
        encoder: enc_report,
        decoder: dec_report,
    });
    Ok(result)
}

pub const DEFAULT_GAIN_POINTS: usize = 21;

/// `points` values of `k₁` on `[0.01 k_max, k_max]` with `k₀ = 0`: the
/// lower half geometric, the upper half uniform, sorted and deduplicated.
/// Always contains `k_max` itself.
pub fn gain_grid(game: &GameSpec, points: usize) -> Vec<LinearEncoder> {
    let k_max = game.max_gain();
    if points <= 1 || k_max == 0.0 {
        return vec![LinearEncoder::new(0.0, k_max)];
    }
    let lo = 0.01 * k_max;
    let n_geo = points / 2;
    let n_uni = points - n_geo;
    let mut gains: Vec<f64> = (0..n_geo)
        .map(|i| lo * (0.5 / 0.01_f64).powf(i as f64 / n_geo as f64))
        .collect();
    gains.extend((0..n_uni).map(|i| {
        let t = (i + 1) as f64 / n_uni as f64;
        0.5 * k_max + t * 0.5 * k_max
    }));
    gains.sort_by(f64::total_cmp);
    gains.dedup();
    if let Some(last) = gains.last_mut() {
        *last = k_max;
    }
    gains
        .into_iter()
        .map(|k1| LinearEncoder::new(0.0, k1))
        .collect()
}

/// Encoders that spend part of the budget on `k₀ ∈ {±½, ±¼, 0}·√P` and the
/// rest on `k₁`.
pub fn offset_grid(game: &GameSpec) -> Vec<LinearEncoder> {
    let p = game.power.get();
    [-0.5, -0.25, 0.0, 0.25, 0.5]
        .iter()
        .map(|&f| {
            let k0 = f * p.sqrt();
            let k1 = ((p - k0 * k0).max(0.0) / game.channel.sigma_s2()).sqrt();
            LinearEncoder::new(k0, k1)
        })
        .collect()
}

/// `(δa, δb)` on the 3×3 stencil `{-h, 0, h}²`, origin included.
pub fn stencil(radius: f64) -> Vec<(f64, f64)> {
    let steps = [-radius, 0.0, radius];
    steps
        .iter()
        .flat_map(|&da| steps.iter().map(move |&db| (da, db)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEvaluation {
    pub encoder: LinearEncoder,
    pub decoder: LinearDecoder,
    pub d_t: f64,
    /// `d_t - D_T*`; negative means the point beat the closed form.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderReport {
    pub closed_form: f64,
    pub evaluations: Vec<GridEvaluation>,
    pub worst_margin: f64,
    pub argmin: usize,
    /// Whether the argmin is the largest-`k₁`, `k₀ = 0` point of the grid.
    pub argmin_at_boundary: bool,
    pub passed: bool,
}

/// Evaluates `D_T(g, h*(g))` by distorted-expectation quadrature on every
/// grid encoder and compares with the closed-form `D_T*`.
pub fn verify_encoder_optimality(
    game: &GameSpec,
    grid: &[LinearEncoder],
    quad: &QuadratureSpec,
) -> Result<EncoderReport> {
    if grid.is_empty() {
        return Err(Error::Argument("encoder grid is empty".into()));
    }
    let src = &game.channel.source;
    if let Some(bad) = grid.iter().find(|e| !game.power.admits(e, src)) {
        return Err(Error::Argument(format!(
            "grid encoder (k0={}, k1={}) uses power {} > {}",
            bad.k0,
            bad.k1,
            bad.power(src),
            game.power.get()
        )));
    }
    let closed_form = if game.power.get() == 0.0 {
        distortion_closed_best_response(&game.channel, 0.0, &game.tx)
    } else {
        stackelberg_solve(game)?.d_t
    };
    let evaluations = grid
        .par_iter()
        .map(|enc| {
            let decoder = best_response_decoder(&game.channel, enc, &game.rx);
            let d_t =
                distortion_distorted_expectation(&game.channel, enc, &decoder, &game.tx, quad)?;
            Ok(GridEvaluation {
                encoder: *enc,
                decoder,
                d_t,
                margin: d_t - closed_form,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut argmin = 0;
    for (i, ev) in evaluations.iter().enumerate() {
        let best = &evaluations[argmin];
        let tie = (ev.d_t - best.d_t).abs() <= 1e-14 * best.d_t.abs();
        if ev.d_t < best.d_t && !tie || tie && prefer(&ev.encoder, &best.encoder) {
            argmin = i;
        }
    }
    let worst_margin = evaluations
        .iter()
        .map(|e| e.margin)
        .fold(f64::INFINITY, f64::min);
    if worst_margin < -ENCODER_FAILURE {
        let ev = evaluations[argmin];
        return Err(Error::Verification {
            check: "encoder_optimality".into(),
            detail: format!(
                "encoder (k0={}, k1={}) reaches D_T={} below closed form {}",
                ev.encoder.k0, ev.encoder.k1, ev.d_t, closed_form
            ),
        });
    }
    let k1_max = grid.iter().map(|e| e.k1).fold(f64::NEG_INFINITY, f64::max);
    let winner = evaluations[argmin].encoder;
    Ok(EncoderReport {
        closed_form,
        argmin,
        argmin_at_boundary: winner.k0 == 0.0 && winner.k1 == k1_max,
        passed: worst_margin >= -ENCODER_SLACK,
        worst_margin,
        evaluations,
    })
}

/// Tie-break toward `k₀ = 0`, then larger `k₁`.
fn prefer(candidate: &LinearEncoder, incumbent: &LinearEncoder) -> bool {
    match (candidate.k0 == 0.0, incumbent.k0 == 0.0) {
        (true, false) => true,
        (false, true) => false,
        _ => candidate.k1 > incumbent.k1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationEvaluation {
    pub delta: (f64, f64),
    /// `E_α[(δa R + δb)²]`, the exact excess for the squared loss.
    pub excess_closed: f64,
    /// Difference of two distorted-expectation quadratures.
    pub excess_quadrature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderReport {
    pub baseline: f64,
    pub evaluations: Vec<PerturbationEvaluation>,
    /// Smallest closed-form excess over nonzero perturbations, if any.
    pub min_excess_nonzero: Option<f64>,
    pub passed: bool,
}

/// Checks that perturbing the best-response decoder never lowers `D_R`.
///
/// Because `S - h*(R)` has zero mean under `p_α(S|R)`, the excess of
/// `h* + δ` is `E_α[(δa R + δb)²] = δa²(Var_α R + k₀²) + 2δaδb k₀ + δb²`.
pub fn verify_decoder_optimality(
    game: &GameSpec,
    enc: &LinearEncoder,
    perturbations: &[(f64, f64)],
    quad: &QuadratureSpec,
) -> Result<DecoderReport> {
    if let Some(p) = perturbations
        .iter()
        .find(|(a, b)| !a.is_finite() || !b.is_finite())
    {
        return Err(Error::Argument(format!("non-finite perturbation {p:?}")));
    }
    let ch = &game.channel;
    let rx = &game.rx;
    let best = best_response_decoder(ch, enc, rx);
    let baseline = distortion_closed(ch, enc, &best, rx);
    let baseline_quad = distortion_distorted_expectation(ch, enc, &best, rx, quad)?;
    let r_second_moment = ch.distorted_marginal(enc, rx.alpha).variance() + enc.k0 * enc.k0;

    let evaluations = perturbations
        .par_iter()
        .map(|&(da, db)| {
            let excess_closed = da * da * r_second_moment + 2.0 * da * db * enc.k0 + db * db;
            let perturbed = best.perturbed(da, db);
            let d = distortion_distorted_expectation(ch, enc, &perturbed, rx, quad)?;
            Ok(PerturbationEvaluation {
                delta: (da, db),
                excess_closed,
                excess_quadrature: d - baseline_quad,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(bad) = evaluations
        .iter()
        .find(|e| e.excess_closed < DECODER_FAILURE)
    {
        return Err(Error::Verification {
            check: "decoder_optimality".into(),
            detail: format!(
                "perturbation {:?} lowers D_R by {}",
                bad.delta, -bad.excess_closed
            ),
        });
    }
    let min_excess_nonzero = evaluations
        .iter()
        .filter(|e| e.delta != (0.0, 0.0))
        .map(|e| e.excess_closed)
        .reduce(f64::min);
    let passed = evaluations
        .iter()
        .all(|e| e.delta == (0.0, 0.0) || e.excess_closed > 0.0);
    Ok(DecoderReport {
        baseline,
        evaluations,
        min_excess_nonzero,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn game(p: f64, at: f64, ar: f64) -> GameSpec {
        GameSpec::new(1.0, 1.0, p, at, ar).unwrap()
    }

    #[test]
    fn best_response_examples() {
        let ch = GaussianTestChannel::new(1.0, 1.0).unwrap();
        let rx = AgentProfile::unbiased();
        assert_eq!(
            best_response_decoder(&ch, &LinearEncoder::new(0.0, 1.0), &rx),
            LinearDecoder::new(0.5, 0.0)
        );
        assert_eq!(
            best_response_decoder(&ch, &LinearEncoder::new(2.0, 1.0), &rx),
            LinearDecoder::new(0.5, -1.0)
        );
        let biased = AgentProfile::new(0.25).unwrap();
        let enc = LinearEncoder::new(0.3, 1.7);
        assert_eq!(
            best_response_decoder(&ch, &enc, &rx),
            best_response_decoder(&ch, &enc, &biased)
        );
    }

    #[test]
    fn solve_examples() {
        let r = stackelberg_solve(&game(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(r.encoder, LinearEncoder::new(0.0, 1.0));
        assert_eq!(r.decoder.a, 0.5);
        assert_eq!((r.d_t, r.d_r), (0.5, 0.5));

        let r = stackelberg_solve(&game(1.0, 0.5, 0.25)).unwrap();
        assert_eq!((r.d_t, r.d_r), (1.0, 2.0));

        let r = stackelberg_solve(&game(3.0, 0.5, 0.5)).unwrap();
        assert_eq!(r.encoder.k1, 3f64.sqrt());
        assert_relative_eq!(r.d_t, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn zero_power_is_degenerate() {
        match stackelberg_solve(&game(0.0, 0.5, 1.0)) {
            Err(Error::DegenerateGame(report)) => {
                assert_eq!(report.encoder, LinearEncoder::new(0.0, 0.0));
                assert_eq!((report.d_t, report.d_r), (2.0, 1.0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grids_are_feasible_and_end_at_the_boundary() {
        let g = game(2.0, 0.5, 0.5);
        let grid = gain_grid(&g, 21);
        assert_eq!(grid.len(), 21);
        assert_eq!(grid.last().unwrap().k1, g.max_gain());
        assert!(grid.windows(2).all(|w| w[0].k1 < w[1].k1));
        assert_relative_eq!(grid[0].k1, 0.01 * g.max_gain(), max_relative = 1e-12);
        for enc in grid.iter().chain(offset_grid(&g).iter()) {
            assert!(g.power.admits(enc, &g.channel.source), "{enc:?}");
        }
        assert_eq!(stencil(0.1).len(), 9);
    }

    #[test]
    fn encoder_grid_examples() {
        let g = game(1.0, 0.5, 0.5);
        let q = QuadratureSpec::default();
        let report = verify_encoder_optimality(&g, &gain_grid(&g, 21), &q).unwrap();
        assert!(report.passed && report.argmin_at_boundary);
        let best = report.evaluations[report.argmin];
        assert_eq!(best.encoder.k1, 1.0);
        assert_relative_eq!(best.d_t, 1.0, max_relative = 1e-12);

        // spending power on k₀ only shrinks the usable gain
        let report = verify_encoder_optimality(&g, &offset_grid(&g), &q).unwrap();
        assert_eq!(report.evaluations[report.argmin].encoder.k0, 0.0);
        for ev in report.evaluations.iter().filter(|e| e.encoder.k0 != 0.0) {
            assert!(ev.margin > 0.0, "{ev:?}");
        }

        let eq = stackelberg_solve(&g).unwrap().encoder;
        let report = verify_encoder_optimality(&g, &[eq], &q).unwrap();
        assert!(report.worst_margin.abs() < 1e-10);
    }

    #[test]
    fn encoder_grid_rejects_infeasible_points() {
        let g = game(1.0, 1.0, 1.0);
        let q = QuadratureSpec::default();
        let out = verify_encoder_optimality(&g, &[LinearEncoder::new(0.0, 1.5)], &q);
        assert!(matches!(out, Err(Error::Argument(_))));
        assert!(matches!(
            verify_encoder_optimality(&g, &[], &q),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn decoder_perturbation_examples() {
        let q = QuadratureSpec::default();
        let enc = LinearEncoder::new(0.0, 1.0);
        let g = game(1.0, 1.0, 1.0);
        let report = verify_decoder_optimality(&g, &enc, &[(0.0, 0.0), (0.1, 0.0)], &q).unwrap();
        assert_eq!(report.evaluations[0].excess_closed, 0.0);
        assert_relative_eq!(
            report.evaluations[1].excess_closed,
            0.02,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            report.evaluations[1].excess_quadrature,
            0.02,
            max_relative = 1e-9
        );

        let g = game(1.0, 1.0, 0.5);
        let report = verify_decoder_optimality(&g, &enc, &[(0.0, 0.1)], &q).unwrap();
        assert_relative_eq!(
            report.evaluations[0].excess_quadrature,
            0.01,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            report.evaluations[0].excess_closed,
            0.01,
            max_relative = 1e-12
        );
    }

    #[test]
    fn verified_solve_sets_flag() {
        let r =
            stackelberg_solve_verified(&game(2.0, 0.75, 0.25), &QuadratureSpec::default()).unwrap();
        assert!(r.verified);
        let diag = r.diagnostics.unwrap();
        assert!(diag.encoder.argmin_at_boundary);
        assert!(diag.decoder.min_excess_nonzero.unwrap() > 0.0);
    }
}
