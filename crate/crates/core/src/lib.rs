//! Strategic communication between prospect-theoretic agents over a scalar
//! Gaussian test channel.
//!
//! A transmitter (leader) sends `U = k₁S + k₀` under `E[U²] <= P`; a receiver
//! (follower) observes `R = U + N` and estimates `Ŝ = aR + b`. Each agent
//! judges squared error through an `α`-tilted law, the continuous limit of a
//! normalized prospect-theory utility. The crate provides
//!
//! * [`prospect`]: weight functions, discrete and continuous PT utilities and
//!   the lattice convergence study;
//! * [`channel`]: exact and tilted posterior/marginal densities;
//! * [`distortion`]: behavioral distortions by closed form, nested
//!   Gauss–Hermite, and raw 2-D quadrature;
//! * [`equilibrium`]: best responses, the leader–follower equilibrium and
//!   grid/perturbation verifiers;
//! * [`mc`]: seeded Monte Carlo oracles;
//! * [`sweep`]: the power sweep, plot data and verification report used by
//!   the `behavioral-comm` binary.
//!
//! ```
//! use behavioral_comm::equilibrium::{stackelberg_solve, GameSpec};
//!
//! let game = GameSpec::new(1.0, 1.0, 1.0, 0.5, 0.25).unwrap();
//! let eq = stackelberg_solve(&game).unwrap();
//! assert_eq!(eq.encoder.k1, 1.0);
//! assert_eq!((eq.d_t, eq.d_r), (1.0, 2.0));
//! ```

pub mod channel;
pub mod distortion;
pub mod equilibrium;
pub mod error;
pub mod gaussian;
pub mod mc;
pub mod prospect;
pub mod quadrature;
pub mod sweep;

pub use channel::{ChannelModel, GaussianTestChannel, LinearEncoder, PowerBudget, SourceModel};
pub use distortion::{AgentProfile, LinearDecoder, QuadratureSpec};
pub use equilibrium::{EquilibriumResult, GameSpec};
pub use error::{Error, Result};
pub use gaussian::GaussianDensity;
pub use mc::{McConfig, McEstimate};
pub use prospect::{Alpha, DiscreteProspect, ValueFunction, WeightFunction};
