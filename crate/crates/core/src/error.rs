//! Error type shared by all simulation modules.

use thiserror::Error;

/// Errors produced by matrix, state, and simulation operations.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// Operand shapes are incompatible (matrix products, state overlaps, ...).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A requested object would exceed the dense-storage dimension budget.
    #[error("dimension budget exceeded: {dim} > {max}")]
    CapacityExceeded { dim: usize, max: usize },

    /// An operation that requires a Hermitian matrix received one that is not.
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    /// A quantum state failed validation (normalization, positivity, trace).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A scalar or configuration argument is out of its allowed range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
