//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A triangular factorization hit a non-positive pivot. Callers only pass
    /// `I + (positive semidefinite)` matrices, so this indicates a caller bug
    /// or catastrophic conditioning, never an expected runtime state.
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// `E[1/max]` of the gamma maximum diverges when `count * shape <= 1`.
    #[error("harmonic-mean constant undefined (divergent integral) for count {count}, shape {shape}")]
    DivergentIntegral { count: usize, shape: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
