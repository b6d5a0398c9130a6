use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI and the C ABI to pick an exit/status code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input data, bad arguments, unreadable files.
    Input,
    /// The numerical solver could not produce an answer.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("value out of domain: {0}")]
    InputDomain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid exposure stack: {0}")]
    InvalidStack(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid CRF table: {0}")]
    InvalidCrf(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("CRF estimation failed: {0}")]
    Solver(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Solver(_) => ErrorKind::Numerical,
            _ => ErrorKind::Input,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
