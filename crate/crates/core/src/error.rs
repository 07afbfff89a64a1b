use num_complex::Complex64;
use thiserror::Error;

/// Errors raised across the solver toolkit.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular to working precision (pivot {pivot})")]
    SingularMatrix { pivot: usize },

    #[error("dense oracle size {size} exceeds the cap of {cap}")]
    OracleCap { size: usize, cap: usize },

    #[error("eigen/singular value iteration did not converge")]
    NoConvergence,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("preconditioner block k={k} is singular (lambda1 = {lambda1}, lambda2 = {lambda2})")]
    SingularPreconditioner { k: usize, lambda1: Complex64, lambda2: Complex64 },

    #[error("imaginary residue {ratio:.3e} exceeds the discard tolerance {tol:.1e}")]
    ImaginaryResidue { ratio: f64, tol: f64 },

    #[error("point ({s}, {v}) lies outside the grid")]
    OutsideDomain { s: f64, v: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
