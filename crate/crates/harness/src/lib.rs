//! Experiment runner for the `heavyclip` optimizers: configuration,
//! trajectory persistence, rate sweeps, burn-in comparisons and the
//! invariant suite.

pub mod cli;
pub mod config;
pub mod coverage;
pub mod error;
pub mod experiment;
pub mod output;
pub mod svg;
pub mod verify;

pub use error::{HarnessError, Result};
