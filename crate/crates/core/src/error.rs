//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::equilibrium::DegenerateReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed arguments (length mismatches, too few points, bad ordering).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A normalizing sum or integral vanished.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error(
        "quadrature for {what} did not converge: relative change {rel_change:e} exceeds {tolerance:e} \
         between {nodes} and {refined} nodes"
    )]
    Quadrature {
        what: &'static str,
        nodes: usize,
        refined: usize,
        rel_change: f64,
        tolerance: f64,
    },

    /// A numerical verifier found a candidate that beats the closed form.
    #[error("verification failed in {check}: {detail}")]
    Verification { check: String, detail: String },

    /// Zero transmit power; the report carries the no-information outcome.
    #[error("degenerate game: zero transmit power leaves D_T = {}, D_R = {}", .0.d_t, .0.d_r)]
    DegenerateGame(Box<DegenerateReport>),

    /// One message per offending configuration field.
    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
