use std::io;
use std::path::PathBuf;

use chaintrunc::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("numerical failure in {op}: {source}")]
    Numerical { op: &'static str, source: CoreError },
}

impl CliError {
    /// 1 for bad configuration or inputs, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } => 1,
            Self::Numerical { .. } => 2,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }
}

/// Tags a core error with the operation that produced it. Malformed input
/// (bad files, out-of-range states, violated preconditions) is a
/// configuration error.
pub(crate) trait Context<T> {
    fn op(self, op: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn op(self, op: &'static str) -> Result<T, CliError> {
        self.map_err(|e| match e {
            CoreError::Parse { .. }
            | CoreError::InvalidMatrix(_)
            | CoreError::InvalidDistribution(_)
            | CoreError::Dimension { .. }
            | CoreError::DimensionMismatch { .. }
            | CoreError::Precondition(_) => CliError::Config(format!("{op}: {e}")),
            source => CliError::Numerical { op, source },
        })
    }
}
