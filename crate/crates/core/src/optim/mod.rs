//! Clipped normalized momentum optimizers and their schedules.

mod certificate;
mod schedule;
mod state;
mod trajectory;

pub use certificate::{burn_in_certificate, BurnInCertificate};
pub use schedule::{schedule, HyperParams, Order};
pub use state::{OptimizerState, StepInfo};
pub use trajectory::{
    recommend_output, run_trajectory, run_trajectory_observed, warmup_policy, warmup_with_hold,
    Algorithm, StepObservation, StepRecord, Trajectory, WarmupMode, DESCENT_TOLERANCE,
};
