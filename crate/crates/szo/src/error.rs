use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("trace iterations must be strictly increasing: last {last}, got {got}")]
    TraceOrder { last: u64, got: u64 },

    #[error("trace query counts must be non-decreasing: last {last}, got {got}")]
    TraceQueries { last: u64, got: u64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("iteration limit reached with residual gradient norm {residual:.3e}")]
    IterationLimit { residual: f64 },

    #[error("no usable trials: {0}")]
    NoTrials(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("dataset file format error: {0}")]
    DatasetFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParam { name: name.to_string(), reason: reason.into() }
    }

    pub(crate) fn config(path: &str, message: impl Into<String>) -> Self {
        Error::Config { path: path.to_string(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
