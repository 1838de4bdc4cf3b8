//! Seeded Monte Carlo estimates of behavioral distortions.
//!
//! Two estimators with different failure modes:
//!
//! * direct sampling from the tilted law, `R ~ p_α(R)` then `S ~ p_α(S|R)`;
//! * self-normalized importance sampling that only ever evaluates the raw
//!   joint density `p(s,r)`, never the closed-form tilted densities.
//!
//! The sample budget is split into fixed-size shards. Shard `i` draws from
//! ChaCha8 keyed by the master seed on stream `i` (offset per estimator), so
//! estimates are bit-identical regardless of thread count, and shard results
//! are merged in index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{GaussianTestChannel, LinearEncoder};
use crate::distortion::{AgentProfile, LinearDecoder};
use crate::error::{Error, Result};
use crate::prospect::Alpha;

/// Generator recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), one stream per shard; normals by rand_distr 0.5 StandardNormal ziggurat";

/// Samples per shard.
pub const SHARD_SIZE: usize = 8192;

const DIRECT_STREAM_BASE: u64 = 0;
const IMPORTANCE_STREAM_BASE: u64 = 1 << 40;

/// Covariance inflation of the importance proposal relative to the tilted
/// law `Σ/α`; above 1 so the weights `p^α/q` stay bounded.
pub const PROPOSAL_INFLATION: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    samples: usize,
    seed: u64,
}

impl McConfig {
    pub const MIN_SAMPLES: usize = 1000;

    pub fn new(samples: usize, seed: u64) -> Result<Self> {
        if samples < Self::MIN_SAMPLES {
            return Err(Error::Validation(vec![format!(
                "mc_samples must be at least {}, got {samples}",
                Self::MIN_SAMPLES
            )]));
        }
        Ok(Self { samples, seed })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn shards(&self) -> impl Iterator<Item = (u64, usize)> + '_ {
        let count = self.samples.div_ceil(SHARD_SIZE);
        (0..count).map(move |i| {
            let len = SHARD_SIZE.min(self.samples - i * SHARD_SIZE);
            (i as u64, len)
        })
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// Running count, mean and centered second moment; merges pairwise.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }
}

/// Weighted sums for a self-normalized estimator.
#[derive(Debug, Clone, Copy, Default)]
struct WeightedSums {
    n: usize,
    w: f64,
    wv: f64,
    w2: f64,
    w2v: f64,
    w2v2: f64,
}

impl WeightedSums {
    fn push(&mut self, w: f64, v: f64) {
        self.n += 1;
        self.w += w;
        self.wv += w * v;
        self.w2 += w * w;
        self.w2v += w * w * v;
        self.w2v2 += w * w * v * v;
    }

    fn merge(self, o: WeightedSums) -> WeightedSums {
        WeightedSums {
            n: self.n + o.n,
            w: self.w + o.w,
            wv: self.wv + o.wv,
            w2: self.w2 + o.w2,
            w2v: self.w2v + o.w2v,
            w2v2: self.w2v2 + o.w2v2,
        }
    }
}

/// Draws `(s, r)` from `p_α(R) p_α(S|R)`. The iterator yields exactly
/// `cfg.samples()` pairs, shard by shard.
pub fn sample_distorted(
    ch: &GaussianTestChannel,
    enc: &LinearEncoder,
    alpha: Alpha,
    cfg: &McConfig,
) -> impl Iterator<Item = (f64, f64)> {
    let ch = *ch;
    let enc = *enc;
    let cfg = *cfg;
    let shards: Vec<(u64, usize)> = cfg.shards().collect();
    shards.into_iter().flat_map(move |(shard, len)| {
        let mut rng = cfg.rng(DIRECT_STREAM_BASE + shard);
        (0..len).map(move |_| draw_distorted(&ch, &enc, alpha, &mut rng))
    })
}

fn draw_distorted(
    ch: &GaussianTestChannel,
    enc: &LinearEncoder,
    alpha: Alpha,
    rng: &mut impl Rng,
) -> (f64, f64) {
    let marginal = ch.distorted_marginal(enc, alpha);
    let z_r: f64 = rng.sample(StandardNormal);
    let r = marginal.mean() + marginal.std_dev() * z_r;
    let post = ch.distorted_posterior(enc, alpha, r);
    let z_s: f64 = rng.sample(StandardNormal);
    (post.mean() + post.std_dev() * z_s, r)
}

/// Sample mean of `v(s, h(r))` under direct tilted sampling.
pub fn mc_distortion(
    ch: &GaussianTestChannel,
    enc: &LinearEncoder,
    dec: &LinearDecoder,
    agent: &AgentProfile,
    cfg: &McConfig,
) -> McEstimate {
    let shards: Vec<(u64, usize)> = cfg.shards().collect();
    let merged = shards
        .par_iter()
        .map(|&(shard, len)| {
            let mut rng = cfg.rng(DIRECT_STREAM_BASE + shard);
            let mut m = Moments::default();
            for _ in 0..len {
                let (s, r) = draw_distorted(ch, enc, agent.alpha, &mut rng);
                m.push(agent.value.eval(s, dec.decode(r)));
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::default(), Moments::merge);
    let var = merged.m2 / (merged.n - 1.0);
    McEstimate {
        value: merged.mean,
        std_err: (var / merged.n).sqrt(),
        samples: cfg.samples,
    }
}

/// Self-normalized importance sampling of the tilted joint.
///
/// The proposal is the generative model with both variances inflated by
/// `c = PROPOSAL_INFLATION/α`: `S ~ N(0, cσ_S²)`, `R = k₁S + k₀ + N`,
/// `N ~ N(0, cσ_N²)`, i.e. the joint law with covariance `cΣ`. Weights are
/// `p(s,r)^α / q(s,r)` from the raw densities. Sampling from `p` itself
/// would give weights `p^{α-1}` whose second moment `∫ p^{2α-1}` diverges
/// for `α <= 1/2`.
///
/// The standard error is the delta-method estimate
/// `sqrt(Σ w²(v - D̂)²) / Σ w`.
pub fn mc_distortion_importance(
    ch: &GaussianTestChannel,
    enc: &LinearEncoder,
    dec: &LinearDecoder,
    agent: &AgentProfile,
    cfg: &McConfig,
) -> McEstimate {
    let a = agent.alpha.get();
    let inflation = PROPOSAL_INFLATION / a;
    let proposal = GaussianTestChannel::new(ch.sigma_s2() * inflation, ch.sigma_n2() * inflation)
        .expect("inflated variances stay positive");
    let (sd_s, sd_n) = (proposal.sigma_s2().sqrt(), proposal.sigma_n2().sqrt());
    let shards: Vec<(u64, usize)> = cfg.shards().collect();
    let sums = shards
        .par_iter()
        .map(|&(shard, len)| {
            let mut rng = cfg.rng(IMPORTANCE_STREAM_BASE + shard);
            let mut acc = WeightedSums::default();
            for _ in 0..len {
                let s = sd_s * rng.sample::<f64, _>(StandardNormal);
                let r = enc.encode(s) + sd_n * rng.sample::<f64, _>(StandardNormal);
                let ln_w =
                    a * ch.ln_joint_density(enc, s, r) - proposal.ln_joint_density(enc, s, r);
                acc.push(ln_w.exp(), agent.value.eval(s, dec.decode(r)));
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(WeightedSums::default(), WeightedSums::merge);
    let value = sums.wv / sums.w;
    let spread = (sums.w2v2 - 2.0 * value * sums.w2v + value * value * sums.w2).max(0.0);
    McEstimate {
        value,
        std_err: spread.sqrt() / sums.w,
        samples: sums.n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_tiny_budgets() {
        assert!(McConfig::new(999, 1).is_err());
        assert!(McConfig::new(1000, 1).is_ok());
    }

    #[test]
    fn shards_cover_the_budget() {
        let cfg = McConfig::new(3 * SHARD_SIZE + 17, 0).unwrap();
        let lens: Vec<usize> = cfg.shards().map(|(_, l)| l).collect();
        assert_eq!(lens, vec![SHARD_SIZE, SHARD_SIZE, SHARD_SIZE, 17]);
    }

    #[test]
    fn moment_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.m2 - whole.m2).abs() < 1e-9 * whole.m2);
    }

    #[test]
    fn sample_stream_is_reproducible() {
        let ch = GaussianTestChannel::new(1.0, 1.0).unwrap();
        let enc = LinearEncoder::new(0.0, 1.0);
        let cfg = McConfig::new(1000, 42).unwrap();
        let a: Vec<_> = sample_distorted(&ch, &enc, Alpha::UNBIASED, &cfg)
            .take(10)
            .collect();
        let b: Vec<_> = sample_distorted(&ch, &enc, Alpha::UNBIASED, &cfg)
            .take(10)
            .collect();
        assert_eq!(a, b);
        assert_eq!(
            sample_distorted(&ch, &enc, Alpha::UNBIASED, &cfg).count(),
            1000
        );
        let other = McConfig::new(1000, 43).unwrap();
        let c: Vec<_> = sample_distorted(&ch, &enc, Alpha::UNBIASED, &other)
            .take(10)
            .collect();
        assert_ne!(a, c);
    }
}
