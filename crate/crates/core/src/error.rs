use thiserror::Error;

/// Errors raised by the arithmetic, summation and harness routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters excluded by the hypotheses of a formula (e.g. p = 3, k < 2).
    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    /// A cost guard or table range would be exceeded.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
