use thiserror::Error;

/// Errors raised across point construction, transformation, evaluation and estimation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input distribution: {0}")]
    InvalidSpec(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("model evaluation failed at point {index}: {message}")]
    Model { index: usize, message: String },

    #[error("external model protocol error: {0}")]
    Protocol(String),

    #[error("inconsistent moment estimate: {0}")]
    Inconsistent(String),

    #[error("unknown case `{name}` (available: {available})")]
    UnknownCase { name: String, available: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code grouping errors by category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_)
            | Error::UnsupportedDimension { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidSpec(_)
            | Error::NotPositiveDefinite(_)
            | Error::UnknownCase { .. } => 2,
            Error::Model { .. } | Error::Inconsistent(_) => 3,
            Error::Protocol(_) => 4,
            Error::Format(_) | Error::Io(_) => 5,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
