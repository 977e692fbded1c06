//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {what} (condition estimate {condition:.3e})")]
    Numerical { what: String, condition: f64 },

    #[error("domain of {points} points exceeds the factorization cap of {cap}; \
             reduce the grid resolution or raise the cap (release profile)")]
    DomainTooLarge { points: usize, cap: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("objective failure: {0}")]
    Objective(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
