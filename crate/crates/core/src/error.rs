use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state space has {count} states, above the cap of {cap}")]
    StateCapExceeded { count: u128, cap: u128 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("q-integer formula is undefined at q = 1")]
    QEqualsOne,

    #[error("truncation order {order} too small for t*|L| = {scale}")]
    TruncationBound { order: usize, scale: f64 },

    #[error("vacuum is not an eigenvector of the Hamiltonian")]
    NotAnEigenvector,

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
