use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported dimension: expected {expected}D input, got {got}D")]
    UnsupportedDimension { expected: usize, got: usize },

    #[error("parameters outside the closed-form region: {0}")]
    WrongRegion(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("no convergence: {0}")]
    NotConverged(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
