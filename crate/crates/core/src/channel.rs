//! Scalar Gaussian test channel with a linear (uncoded) encoder.
//!
//! `S ~ N(0, σ_S²)`, `U = k₁S + k₀`, `R = U + N` with `N ~ N(0, σ_N²)`.
//! Every density here is Gaussian and returned in closed form, including the
//! `α`-tilted posterior and marginal whose product is the renormalized
//! `p(s, r)^α`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian::GaussianDensity;
use crate::prospect::Alpha;

/// Source variance `σ_S²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    sigma_s2: f64,
}

impl SourceModel {
    pub fn new(sigma_s2: f64) -> Result<Self> {
        if sigma_s2 > 0.0 && sigma_s2.is_finite() {
            Ok(Self { sigma_s2 })
        } else {
            Err(Error::Domain(format!(
                "source variance must be positive, got {sigma_s2}"
            )))
        }
    }

    pub fn sigma_s2(&self) -> f64 {
        self.sigma_s2
    }

    pub fn density(&self) -> GaussianDensity {
        GaussianDensity::from_parts(0.0, self.sigma_s2)
    }
}

/// Additive noise variance `σ_N²`. Noiseless channels are not modelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    sigma_n2: f64,
}

impl ChannelModel {
    pub fn new(sigma_n2: f64) -> Result<Self> {
        if sigma_n2 > 0.0 && sigma_n2.is_finite() {
            Ok(Self { sigma_n2 })
        } else {
            Err(Error::Domain(format!(
                "noise variance must be positive, got {sigma_n2}"
            )))
        }
    }

    pub fn sigma_n2(&self) -> f64 {
        self.sigma_n2
    }
}

/// `g(S) = k₁S + k₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearEncoder {
    pub k0: f64,
    pub k1: f64,
}

impl LinearEncoder {
    pub fn new(k0: f64, k1: f64) -> Self {
        Self { k0, k1 }
    }

    pub fn encode(&self, s: f64) -> f64 {
        self.k1 * s + self.k0
    }

    /// `E[U²] = k₁²σ_S² + k₀²`.
    pub fn power(&self, src: &SourceModel) -> f64 {
        self.k1 * self.k1 * src.sigma_s2 + self.k0 * self.k0
    }
}

/// Transmit power budget `E[U²] <= P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    p: f64,
}

impl PowerBudget {
    /// Slack allowed when checking an encoder against the budget.
    pub const SLACK: f64 = 1e-12;

    pub fn new(p: f64) -> Result<Self> {
        if p >= 0.0 && p.is_finite() {
            Ok(Self { p })
        } else {
            Err(Error::Domain(format!(
                "power budget must be nonnegative, got {p}"
            )))
        }
    }

    pub fn get(&self) -> f64 {
        self.p
    }

    pub fn admits(&self, enc: &LinearEncoder, src: &SourceModel) -> bool {
        enc.power(src) <= self.p + Self::SLACK
    }
}

/// Source plus noise; the encoder is supplied per query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTestChannel {
    pub source: SourceModel,
    pub noise: ChannelModel,
}

impl GaussianTestChannel {
    pub fn new(sigma_s2: f64, sigma_n2: f64) -> Result<Self> {
        Ok(Self {
            source: SourceModel::new(sigma_s2)?,
            noise: ChannelModel::new(sigma_n2)?,
        })
    }

    pub fn sigma_s2(&self) -> f64 {
        self.source.sigma_s2()
    }

    pub fn sigma_n2(&self) -> f64 {
        self.noise.sigma_n2()
    }

    /// `Var(R) = k₁²σ_S² + σ_N²`, never below `σ_N² > 0`.
    pub fn received_variance(&self, enc: &LinearEncoder) -> f64 {
        enc.k1 * enc.k1 * self.sigma_s2() + self.sigma_n2()
    }

    /// Posterior-mean slope `k₁σ_S² / (k₁²σ_S² + σ_N²)`.
    pub fn posterior_gain(&self, enc: &LinearEncoder) -> f64 {
        enc.k1 * self.sigma_s2() / self.received_variance(enc)
    }

    /// `Var(S | R) = σ_S²σ_N² / (k₁²σ_S² + σ_N²)`.
    pub fn posterior_variance(&self, enc: &LinearEncoder) -> f64 {
        self.sigma_s2() * self.sigma_n2() / self.received_variance(enc)
    }

    pub fn marginal(&self, enc: &LinearEncoder) -> GaussianDensity {
        GaussianDensity::from_parts(enc.k0, self.received_variance(enc))
    }

    /// `p(S | R = r)`; reduces to the prior when `k₁ = 0`.
    pub fn posterior(&self, enc: &LinearEncoder, r: f64) -> GaussianDensity {
        GaussianDensity::from_parts(
            self.posterior_gain(enc) * (r - enc.k0),
            self.posterior_variance(enc),
        )
    }

    /// `p_α(S | R = r)`: posterior mean, variance divided by `α`.
    pub fn distorted_posterior(
        &self,
        enc: &LinearEncoder,
        alpha: Alpha,
        r: f64,
    ) -> GaussianDensity {
        self.posterior(enc, r).tilt(alpha)
    }

    /// `p_α(R) = N(k₀, (k₁²σ_S² + σ_N²)/α)`.
    pub fn distorted_marginal(&self, enc: &LinearEncoder, alpha: Alpha) -> GaussianDensity {
        self.marginal(enc).tilt(alpha)
    }

    /// `∫∫ p(s, r)^α ds dr = (1/α)(2π σ_S σ_N)^{1-α}`. The joint covariance
    /// has determinant `σ_S²σ_N²` whatever the encoder, so `k₀, k₁` drop out.
    pub fn alpha_normalizer(&self, alpha: Alpha) -> f64 {
        let a = alpha.get();
        let sigma_prod = (self.sigma_s2() * self.sigma_n2()).sqrt();
        (2.0 * PI * sigma_prod).powf(1.0 - a) / a
    }

    /// Raw joint density `p(s) p(r | s)` from the generative model.
    pub fn joint_density(&self, enc: &LinearEncoder, s: f64, r: f64) -> f64 {
        self.ln_joint_density(enc, s, r).exp()
    }

    pub fn ln_joint_density(&self, enc: &LinearEncoder, s: f64, r: f64) -> f64 {
        let (vs, vn) = (self.sigma_s2(), self.sigma_n2());
        let noise = r - enc.encode(s);
        -0.5 * (s * s / vs + noise * noise / vn) - (2.0 * PI).ln() - 0.5 * (vs * vn).ln()
    }
}
