//! Clipped normalized momentum methods for heavy-tailed stochastic
//! optimization in ℓ_q spaces, together with the concentration bounds and
//! inequality checks used to validate them.

pub mod analysis;
pub mod concentration;
pub mod error;
pub mod optim;
pub mod problems;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
pub use optim::{
    burn_in_certificate, run_trajectory, schedule, Algorithm, BurnInCertificate, HyperParams,
    OptimizerState, Order, Trajectory, WarmupMode,
};
pub use problems::{NoiseModel, Problem, ProblemKind};
pub use space::{DualVector, NormedSpace, PrimalVector};
