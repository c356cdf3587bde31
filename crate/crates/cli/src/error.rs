use mqr_core::Error as CoreError;
use thiserror::Error;

/// Failure with the process exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// exit 2
    #[error("{0}")]
    Invalid(String),
    /// exit 3
    #[error("{0}")]
    NoRoot(String),
    /// exit 1
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::NoRoot(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NoPositiveRoot { .. } => CliError::NoRoot(e.to_string()),
            CoreError::ConvergenceFailure { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
