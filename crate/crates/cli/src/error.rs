use std::path::PathBuf;

use thiserror::Error;
use wrmm_core::Error as CoreError;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("policy: {0}")]
    Policy(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 ok, 1 I/O, 2 config, 3 solver, 4 policy, 5 validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Policy(_) => 4,
            CliError::Validation(_) => 5,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::NonConvergence { .. }
            | CoreError::IntegrandOverflow { .. }
            | CoreError::QuadratureNonFinite => CliError::Solver(msg),
            CoreError::DegeneratePolicy(_) => CliError::Policy(msg),
            _ => CliError::Config(msg),
        }
    }
}
