//! Behavioral distortions of a linear encoder/decoder pair.
//!
//! The distortion of an agent with exponent `α` is the `α`-tilted average of
//! its loss over the joint law of `(S, R)`:
//!
//! ```text
//! D = ∫∫ p(s,r)^α v(s, h(r)) ds dr / ∫∫ p(s,r)^α ds dr
//! ```
//!
//! Three independent routes are provided: raw 2-D quadrature of the ratio
//! above, nested Gauss–Hermite under the closed-form tilted densities
//! `p_α(R) p_α(S|R)`, and closed forms for the squared loss.

use crate::channel::{GaussianTestChannel, LinearEncoder};
use crate::error::{Error, Result};
use crate::prospect::{Alpha, ValueFunction};
use crate::quadrature::{gauss_legendre, gaussian_expectation, with_refinement};

/// Relative change tolerated between a quadrature and its node-doubled refinement.
pub const REFINEMENT_TOLERANCE: f64 = 1e-6;

/// A biased agent: weighting exponent plus loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentProfile {
    pub alpha: Alpha,
    pub value: ValueFunction,
}

impl AgentProfile {
    /// Squared-error agent with exponent `alpha`.
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(Self {
            alpha: Alpha::new(alpha)?,
            value: ValueFunction::SquaredError,
        })
    }

    pub fn unbiased() -> Self {
        Self {
            alpha: Alpha::UNBIASED,
            value: ValueFunction::SquaredError,
        }
    }
}

/// `Ŝ = a·R + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDecoder {
    pub a: f64,
    pub b: f64,
}

impl LinearDecoder {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn decode(&self, r: f64) -> f64 {
        self.a * r + self.b
    }

    pub fn perturbed(&self, da: f64, db: f64) -> Self {
        Self::new(self.a + da, self.b + db)
    }
}

/// Node count per axis and truncation width for the quadrature routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    nodes: usize,
    trunc_sigmas: f64,
}

impl QuadratureSpec {
    pub fn new(nodes: usize, trunc_sigmas: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if nodes < 16 {
            problems.push(format!("quad_nodes must be at least 16, got {nodes}"));
        }
        if !(trunc_sigmas >= 8.0 && trunc_sigmas.is_finite()) {
            problems.push(format!(
                "quad_trunc_sigmas must be at least 8, got {trunc_sigmas}"
            ));
        }
        if problems.is_empty() {
            Ok(Self {
                nodes,
                trunc_sigmas,
            })
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn trunc_sigmas(&self) -> f64 {
        self.trunc_sigmas
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 96,
            trunc_sigmas: 10.0,
        }
    }
}

/// `∫∫ p(s,r)^α ds dr` and `∫∫ p(s,r)^α v(s, h(r)) ds dr` on a truncated
/// domain. The outer variable is `s` over `±T σ_S/√α`; the inner is `r`
/// over `k₁s + k₀ ± T σ_N/√α`, which follows the ridge of the joint density
/// however steep the encoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedIntegrals {
    pub mass: f64,
    pub loss: f64,
}

fn raw_tilted_integrals(
    ch: &GaussianTestChannel,
    enc: &LinearEncoder,
    dec: &LinearDecoder,
    agent: &AgentProfile,
    nodes: usize,
    trunc: f64,
) -> TiltedIntegrals {
    let a = agent.alpha.get();
    let s_half = trunc * (ch.sigma_s2() / a).sqrt();
    let r_half = trunc * (ch.sigma_n2() / a).sqrt();
    let rule = gauss_legendre(nodes);
    let mut mass = 0.0;
    let mut loss = 0.0;
    for (&ts, &ws) in rule.nodes.iter().zip(&rule.weights) {
        let s = s_half * ts;
        let center = enc.encode(s);
        let (mut inner_mass, mut inner_loss) = (0.0, 0.0);
        for (&tr, &wr) in rule.nodes.iter().zip(&rule.weights) {
            let r = center + r_half * tr;
            let tilted = wr * (a * ch.ln_joint_density(enc, s, r)).exp();
            inner_mass += tilted;
            inner_loss += tilted * agent.value.eval(s, dec.decode(r));
        }
        mass += ws * inner_mass;
        loss += ws * inner_loss;
    }
    let jacobian = s_half * r_half;
    TiltedIntegrals {
        mass: jacobian * mass,
        loss: jacobian * loss,
    }
}

/// The tilted joint mass and loss integrals at the configured node count.
pub fn tilted_joint_integrals(
    ch: &GaussianTestChannel,
    enc: &LinearEncoder,
    dec: &LinearDecoder,
    agent: &AgentProfile,
    quad: &QuadratureSpec,
) -> TiltedIntegrals {
    raw_tilted_integrals(ch, enc, dec, agent, quad.nodes, quad.trunc_sigmas)
}

/// `∫∫ p(s,r)^α ds dr` by raw 2-D quadrature, checked against a node-doubled
/// refinement. The closed form is [`GaussianTestChannel::alpha_normalizer`].
pub fn tilted_joint_mass(
    ch: &GaussianTestChannel,
    enc: &LinearEncoder,
    alpha: Alpha,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let agent = AgentProfile {
        alpha,
        value: ValueFunction::SquaredError,
    };
    let dec = LinearDecoder::new(0.0, 0.0);
    with_refinement("tilted joint mass", quad.nodes, REFINEMENT_TOLERANCE, |n| {
        raw_tilted_integrals(ch, enc, &dec, &agent, n, quad.trunc_sigmas).mass
    })
}

/// Distortion as the ratio of raw 2-D integrals of `p(s,r)^α`.
pub fn distortion_quadrature(
    ch: &GaussianTestChannel,
    enc: &LinearEncoder,
    dec: &LinearDecoder,
    agent: &AgentProfile,
    quad: &QuadratureSpec,
) -> Result<f64> {
    with_refinement(
        "raw joint distortion",
        quad.nodes,
        REFINEMENT_TOLERANCE,
        |n| {
            let t = raw_tilted_integrals(ch, enc, dec, agent, n, quad.trunc_sigmas);
            t.loss / t.mass
        },
    )
}

/// Distortion as an expectation under `p_α(R) p_α(S|R)`, by nested
/// Gauss–Hermite rules. Exact for the squared loss.
pub fn distortion_distorted_expectation(
    ch: &GaussianTestChannel,
    enc: &LinearEncoder,
    dec: &LinearDecoder,
    agent: &AgentProfile,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let marginal = ch.distorted_marginal(enc, agent.alpha);
    with_refinement(
        "distorted expectation",
        quad.nodes,
        REFINEMENT_TOLERANCE,
        |n| {
            gaussian_expectation(&marginal, n, |r| {
                let post = ch.distorted_posterior(enc, agent.alpha, r);
                let s_hat = dec.decode(r);
                gaussian_expectation(&post, n, |s| agent.value.eval(s, s_hat))
            })
        },
    )
}

/// Closed-form distortion of an arbitrary linear pair under the squared
/// loss:
///
/// ```text
/// D = [σ²_{S|R} + (c - a)² Var(R)] / α + (a k₀ + b)²
/// ```
///
/// with `c` the posterior-mean gain. The bracket is `α`-scaled because both
/// `p_α(R)` and `p_α(S|R)` are; the bias term is not.
pub fn distortion_closed(
    ch: &GaussianTestChannel,
    enc: &LinearEncoder,
    dec: &LinearDecoder,
    agent: &AgentProfile,
) -> f64 {
    match agent.value {
        ValueFunction::SquaredError => {
            let c = ch.posterior_gain(enc);
            let spread =
                ch.posterior_variance(enc) + (c - dec.a).powi(2) * ch.received_variance(enc);
            let bias = dec.a * enc.k0 + dec.b;
            spread / agent.alpha.get() + bias * bias
        }
    }
}

/// `D(k₁) = (1/α) σ_S²σ_N² / (k₁²σ_S² + σ_N²)` when the decoder is the
/// posterior mean (any `k₀`, which the decoder cancels).
pub fn distortion_closed_best_response(
    ch: &GaussianTestChannel,
    k1: f64,
    agent: &AgentProfile,
) -> f64 {
    match agent.value {
        ValueFunction::SquaredError => {
            let enc = LinearEncoder::new(0.0, k1);
            ch.posterior_variance(&enc) / agent.alpha.get()
        }
    }
}

/// `D_T / D_R` under the best-response decoder; equals `α_R / α_T` for
/// every `k₁`.
pub fn distortion_ratio(ch: &GaussianTestChannel, k1: f64, alpha_t: Alpha, alpha_r: Alpha) -> f64 {
    let tx = AgentProfile {
        alpha: alpha_t,
        value: ValueFunction::SquaredError,
    };
    let rx = AgentProfile {
        alpha: alpha_r,
        value: ValueFunction::SquaredError,
    };
    distortion_closed_best_response(ch, k1, &tx) / distortion_closed_best_response(ch, k1, &rx)
}
