use thiserror::Error;

/// Errors raised by the estimators, the neighbor search and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid neighbor order: k = {k} but only {available} candidate points")]
    InvalidK { k: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric positive-definite: {0}")]
    NotPositiveDefinite(String),

    #[error("empirical covariance is singular (condition number {condition:.3e})")]
    SingularCovariance { condition: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("sample point {index} lies outside the support of the reference density")]
    SupportViolation { index: usize },

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
