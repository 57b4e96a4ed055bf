use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A structured text record failed to parse or validate.
    #[error("{}:{line}: {field}: {message}", path.display())]
    Record {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },

    #[error("float grid: bad magic {found:?}, expected \"HSLF1\"")]
    BadMagic { found: Vec<u8> },

    #[error("float grid: unsupported version {0}")]
    UnsupportedVersion(u32),

    #[error("float grid: truncated, expected {expected} bytes but found {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("float grid: unknown channel name {0:?}")]
    UnknownChannel(String),

    #[error("float grid: class set incomplete, found {found} of 5 class channels")]
    IncompleteClassSet { found: usize },

    #[error("float grid: {0}")]
    GridLayout(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
