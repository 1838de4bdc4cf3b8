//! Prospect-theory primitives: weight and value functions, discrete
//! prospects, the normalized (Karmarkar) utility and its continuous limit.
//!
//! The continuous functional is
//!
//! ```text
//! PT(p) = ∫ p(x)^α v(x) dx / ∫ p(x)^α dx
//! ```
//!
//! where `α` is the small-probability tail exponent of the weight function,
//! `w(ε) ~ k ε^α`. No other feature of `w` survives the limit. For a Gaussian
//! `p = N(μ, σ²)` the tilted law `p^α / ∫p^α` is `N(μ, σ²/α)`, so the
//! functional is an ordinary expectation under a widened Gaussian.

use crate::error::{Error, Result};
use crate::gaussian::GaussianDensity;
use crate::quadrature;

/// Default truncation of a discretized density, in standard deviations.
pub const DEFAULT_TRUNCATION: f64 = 10.0;

/// Gauss–Hermite order used by [`continuous_pt`].
pub const CONTINUOUS_PT_NODES: usize = 64;

/// Weighting exponent in `(0, 1]`. `1` is the unbiased (expected-utility) agent.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub const UNBIASED: Alpha = Alpha(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Alpha(alpha))
        } else {
            Err(Error::Domain(format!(
                "weighting exponent must lie in (0, 1], got {alpha}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Alpha::new(value)
    }
}

/// Probability weighting function `w: [0,1] → [0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFunction {
    /// `w(p) = p^α / (p^α + (1-p)^α)`; tail constant `k = 1`.
    KarmarkarPower { alpha: Alpha },
    /// `w(p) = min(1, k p^α)`.
    PowerTail { alpha: Alpha, k: f64 },
}

impl WeightFunction {
    pub fn karmarkar(alpha: f64) -> Result<Self> {
        Ok(Self::KarmarkarPower {
            alpha: Alpha::new(alpha)?,
        })
    }

    pub fn power_tail(alpha: f64, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!(
                "tail constant must be positive, got {k}"
            )));
        }
        Ok(Self::PowerTail {
            alpha: Alpha::new(alpha)?,
            k,
        })
    }

    /// Exponent `α` in `w(ε)/ε^α → k`.
    pub fn tail_alpha(&self) -> Alpha {
        match *self {
            Self::KarmarkarPower { alpha } | Self::PowerTail { alpha, .. } => alpha,
        }
    }

    /// Constant `k` in `w(ε)/ε^α → k`.
    pub fn tail_constant(&self) -> f64 {
        match *self {
            Self::KarmarkarPower { .. } => 1.0,
            Self::PowerTail { k, .. } => k,
        }
    }

    pub fn eval(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!(
                "probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(self.eval_unchecked(p))
    }

    fn eval_unchecked(&self, p: f64) -> f64 {
        match *self {
            Self::KarmarkarPower { alpha } => {
                let a = alpha.get();
                if p == 0.0 || p == 1.0 {
                    return p;
                }
                let num = p.powf(a);
                num / (num + (1.0 - p).powf(a))
            }
            Self::PowerTail { alpha, k } => (k * p.powf(alpha.get())).min(1.0),
        }
    }
}

/// Outcome valuation. Only the squared error is in scope; the variant set is
/// left open for other polynomial-growth losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[non_exhaustive]
pub enum ValueFunction {
    /// `v(s, ŝ) = (ŝ - s)²`
    #[default]
    SquaredError,
}

impl ValueFunction {
    pub fn eval(&self, s: f64, s_hat: f64) -> f64 {
        match self {
            Self::SquaredError => {
                let d = s_hat - s;
                d * d
            }
        }
    }

    /// `x ↦ v(x, reference)`, the loss of a fixed estimate.
    pub fn at_reference(self, reference: f64) -> impl Fn(f64) -> f64 {
        move |x| self.eval(x, reference)
    }
}

/// One atom of a discretized law: mass `prob` at outcome `z / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub z: i64,
    pub prob: f64,
}

/// A lattice law `Σ_z p_{z,n} δ_{z/n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteProspect {
    n: u32,
    atoms: Vec<Atom>,
}

impl DiscreteProspect {
    /// Mass lost to truncation that is still accepted.
    pub const MASS_TOLERANCE: f64 = 1e-8;

    pub fn new(n: u32, atoms: Vec<Atom>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument(
                "grid refinement n must be at least 1".into(),
            ));
        }
        if atoms.is_empty() {
            return Err(Error::Argument("a prospect needs at least one atom".into()));
        }
        if let Some(a) = atoms.iter().find(|a| !(0.0..=1.0).contains(&a.prob)) {
            return Err(Error::Domain(format!(
                "atom z={} has probability {}",
                a.z, a.prob
            )));
        }
        if atoms.windows(2).any(|w| w[0].z >= w[1].z) {
            return Err(Error::Argument(
                "atom indices must be strictly increasing".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|a| a.prob).sum();
        if (total - 1.0).abs() > Self::MASS_TOLERANCE {
            return Err(Error::Argument(format!(
                "atom probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { n, atoms })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn outcome(&self, atom: &Atom) -> f64 {
        atom.z as f64 / f64::from(self.n)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob).sum()
    }

    /// Plain expectation `Σ p_z v(z/n)`.
    pub fn expectation(&self, v: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.prob * v(self.outcome(a))).sum()
    }
}

/// Lattice discretization with cell masses `p_{z,n} = P(z/n < X <= (z+1)/n)`,
/// keeping every `z` whose outcome `z/n` lies within `trunc` standard
/// deviations of the mean.
pub fn discretize(p: &GaussianDensity, n: u32, trunc: f64) -> Result<DiscreteProspect> {
    if n == 0 {
        return Err(Error::Argument(
            "grid refinement n must be at least 1".into(),
        ));
    }
    if !(trunc >= 6.0 && trunc.is_finite()) {
        return Err(Error::Argument(format!(
            "truncation must be at least 6 standard deviations, got {trunc}"
        )));
    }
    let nf = f64::from(n);
    let half_width = trunc * p.std_dev();
    let z_lo = ((p.mean() - half_width) * nf).ceil() as i64;
    let z_hi = ((p.mean() + half_width) * nf).floor() as i64;
    let atoms = (z_lo..=z_hi)
        .map(|z| Atom {
            z,
            prob: p.interval_mass(z as f64 / nf, (z + 1) as f64 / nf),
        })
        .collect();
    DiscreteProspect::new(n, atoms)
}

/// Unnormalized discrete utility `Σ w(pᵢ) vᵢ`. `values` are already passed
/// through the value function.
pub fn discrete_pt_unnormalized(probs: &[f64], values: &[f64], w: &WeightFunction) -> Result<f64> {
    if probs.len() != values.len() {
        return Err(Error::Argument(format!(
            "{} probabilities but {} values",
            probs.len(),
            values.len()
        )));
    }
    probs
        .iter()
        .zip(values)
        .map(|(&p, &v)| Ok(w.eval(p)? * v))
        .sum()
}

/// Normalized discrete utility `Σ w(p_z) v(z/n) / Σ w(p_z)`.
pub fn discrete_pt_karmarkar(
    prospect: &DiscreteProspect,
    v: impl Fn(f64) -> f64,
    w: &WeightFunction,
) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for atom in prospect.atoms() {
        let weight = w.eval(atom.prob)?;
        num += weight * v(prospect.outcome(atom));
        den += weight;
    }
    if den < 1e-300 {
        return Err(Error::NumericalDegeneracy(format!(
            "total decision weight {den:e} vanishes"
        )));
    }
    Ok(num / den)
}

/// Continuous normalized utility of a Gaussian, computed as a Gauss–Hermite
/// expectation under the tilted law `N(μ, σ²/α)`.
pub fn continuous_pt(p: &GaussianDensity, v: impl Fn(f64) -> f64, alpha: Alpha) -> f64 {
    quadrature::gaussian_expectation(&p.tilt(alpha), CONTINUOUS_PT_NODES, v)
}

/// The same functional evaluated directly from `p(x)^α` by a refined
/// trapezoid rule on `μ ± 10σ·max(1, 1/√α)`. Shares no code path with
/// [`continuous_pt`] beyond the density itself.
pub fn continuous_pt_direct(
    p: &GaussianDensity,
    v: impl Fn(f64) -> f64,
    alpha: Alpha,
) -> Result<f64> {
    let a = alpha.get();
    let half = DEFAULT_TRUNCATION * p.std_dev() * (1.0 / a.sqrt()).max(1.0);
    let (lo, hi) = (p.mean() - half, p.mean() + half);
    let tilted = |x: f64| (a * p.ln_pdf(x)).exp();
    let mass = quadrature::trapezoid_refined(lo, hi, 1e-13, 24, tilted)?;
    let value = quadrature::trapezoid_refined(lo, hi, 1e-13, 24, |x| tilted(x) * v(x))?;
    if mass < 1e-300 {
        return Err(Error::NumericalDegeneracy("tilted mass vanishes".into()));
    }
    Ok(value / mass)
}

/// Closed form for the squared loss against a fixed estimate:
/// `(μ - reference)² + σ²/α`.
pub fn squared_error_pt(p: &GaussianDensity, alpha: Alpha, reference: f64) -> f64 {
    let d = p.mean() - reference;
    d * d + p.variance() / alpha.get()
}

/// Result of a log-log tail fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub alpha: f64,
    pub k: f64,
}

/// Least-squares fit of `ln w(ε) = α ln ε + ln k` over a decreasing grid of
/// small probabilities in `(0, 0.1]`.
pub fn tail_exponent(w: &WeightFunction, eps_grid: &[f64]) -> Result<TailFit> {
    if eps_grid.len() < 3 {
        return Err(Error::Argument(format!(
            "tail fit needs at least 3 points, got {}",
            eps_grid.len()
        )));
    }
    if eps_grid.iter().any(|&e| !(e > 0.0 && e <= 0.1)) {
        return Err(Error::Argument(
            "tail grid points must lie in (0, 0.1]".into(),
        ));
    }
    if eps_grid.windows(2).any(|p| p[0] <= p[1]) {
        return Err(Error::Argument(
            "tail grid must be strictly decreasing".into(),
        ));
    }
    let mut xs = Vec::with_capacity(eps_grid.len());
    let mut ys = Vec::with_capacity(eps_grid.len());
    for &e in eps_grid {
        let we = w.eval(e)?;
        if we <= 0.0 {
            return Err(Error::NumericalDegeneracy(format!(
                "w({e:e}) = 0 has no logarithm"
            )));
        }
        xs.push(e.ln());
        ys.push(we.ln());
    }
    let m = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / m;
    let y_bar = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_bar) * (y - y_bar))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(TailFit {
        alpha: slope,
        k: (y_bar - slope * x_bar).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub n: u32,
    pub pt_discrete: f64,
    pub error: f64,
}

/// `|PT(p_n) - PT(p)|` for each refinement in `n_list`, with the limit taken
/// at the weight function's tail exponent. The lattice spans
/// `DEFAULT_TRUNCATION` standard deviations of the tilted law, which is
/// `1/√α` wider than `p`.
pub fn convergence_study(
    p: &GaussianDensity,
    v: impl Fn(f64) -> f64 + Copy,
    w: &WeightFunction,
    n_list: &[u32],
) -> Result<Vec<ConvergencePoint>> {
    let alpha = w.tail_alpha();
    let limit = continuous_pt(p, v, alpha);
    let trunc = DEFAULT_TRUNCATION / alpha.get().sqrt();
    n_list
        .iter()
        .map(|&n| {
            let prospect = discretize(p, n, trunc)?;
            let pt = discrete_pt_karmarkar(&prospect, v, w)?;
            Ok(ConvergencePoint {
                n,
                pt_discrete: pt,
                error: (pt - limit).abs(),
            })
        })
        .collect()
}
