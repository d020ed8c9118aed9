use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("size mismatch: expected n = {expected}, got n = {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("incidence matrix is not a strict total order: {0}")]
    NotTotalOrder(String),

    #[error("invalid cycle form: {0}")]
    InvalidCycles(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("model inconsistent with encoding: {0}")]
    Decode(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
