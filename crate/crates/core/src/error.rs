use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("matrix not positive definite after jitter escalation")]
    Factorization,
    #[error("anchor pool capacity {cap} exceeded (requested {requested})")]
    PoolCapacity { cap: usize, requested: usize },
    #[error("objective evaluation failed: {0}")]
    ObjectiveFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
