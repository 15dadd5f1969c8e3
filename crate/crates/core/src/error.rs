use thiserror::Error;

/// Errors raised by the optimizer library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vectors belong to different normed spaces")]
    SpaceMismatch,

    #[error("non-finite component at index {index}")]
    NonFinite { index: usize },

    #[error("momentum weight alpha = {alpha} exceeds 1; increase the horizon T or decrease b")]
    MomentumTooLarge { alpha: f64 },

    #[error("noise model has no calibrated moment bound G; call calibrate first")]
    Uncalibrated,

    #[error("trajectory has {len} steps but the burn-in requires at least {required}")]
    TrajectoryTooShort { len: usize, required: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
