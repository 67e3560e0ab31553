use thiserror::Error;

/// Errors raised by the numerical kernels, generators and recovery routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is rank deficient (numerical rank {rank} < {required})")]
    RankDeficient { rank: usize, required: usize },
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(&'static str),
    #[error("invalid sparsity {s} for ambient dimension {n}")]
    InvalidSparsity { s: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("non-finite entry encountered")]
    NonFinite,
    #[error("true vector has zero norm")]
    ZeroTruth,
    #[error("no trial records in cell")]
    EmptyCell,
    #[error("probability list does not match the sparsity grid")]
    GridMismatch,
}

pub type Result<T> = core::result::Result<T, Error>;
