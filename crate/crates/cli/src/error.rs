use thiserror::Error;

/// Command failure, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration. Exit code 1.
    #[error("{0}")]
    Validation(String),
    /// Unreadable, malformed or inconsistent input data, or failed writes.
    /// Exit code 2.
    #[error("{0}")]
    Data(String),
    /// A broken internal invariant. Exit code 3.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    /// Wraps a core error raised while handling `what` (usually a path).
    pub fn data_at(what: impl std::fmt::Display, err: semline_core::Error) -> Self {
        CliError::Data(format!("{what}: {err}"))
    }
}

impl From<semline_core::Error> for CliError {
    fn from(e: semline_core::Error) -> Self {
        match e {
            semline_core::Error::InvalidArgument(m) => CliError::Validation(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
