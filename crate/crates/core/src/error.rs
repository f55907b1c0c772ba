use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("problem size must be at least 1")]
    EmptyProblem,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("size {n} exceeds enumeration limit {limit}")]
    SizeLimit { n: usize, limit: usize },
    #[error("unknown sampler backend `{0}`")]
    UnknownBackend(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
