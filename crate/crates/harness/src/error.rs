use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Core(#[from] heavyclip::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Output(String),

    #[error("{0} check(s) failed")]
    InvariantFailure(usize),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        HarnessError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// 2 for bad configuration, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        use heavyclip::Error as E;
        match self {
            HarnessError::Config { .. } => 2,
            HarnessError::Core(E::InvalidParameter { .. } | E::MomentumTooLarge { .. } | E::DimensionMismatch { .. }) => 2,
            _ => 1,
        }
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Output(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Output(format!("json: {e}"))
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
