use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("no permutation has a strictly positive weight product")]
    EmptySupport,
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("index sets differ in size: {rows} rows vs {cols} columns")]
    SizeMismatch { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid peel: {0}")]
    InvalidPeel(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid flow matrix: {0}")]
    InvalidFlow(String),
    #[error("entry ({row}, {col}) is positive outside the support of theta")]
    SupportViolation { row: usize, col: usize },
    #[error("{0} is not an integer")]
    NonIntegral(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
