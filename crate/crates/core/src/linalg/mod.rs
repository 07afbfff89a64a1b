//! Numeric substrate: sparse and dense matrices, block vectors, the unitary
//! DFT and the dense verification oracles.

pub mod banded;
pub mod block;
pub mod dense;
pub mod dft;
pub mod scalar;
pub mod sparse;

pub use banded::{BandLu, Ordering};
pub use block::BlockVector;
pub use dense::{
    dense_eig, dense_eig_capped, dense_solve, norm2_dense, singular_values, singular_values_complex, DenseLu,
    DenseMatrix, EigenDecomposition, DEFAULT_ORACLE_CAP,
};
pub use dft::{DftDirection, DftPlan};
pub use scalar::{norm2, Scalar};
pub use sparse::{ComplexSparseMatrix, CsrMatrix, Definiteness, MatrixFlags, SparseMatrix};

/// `y = A x` for the real spatial matrices.
pub fn spmv(a: &SparseMatrix, x: &[f64]) -> crate::Result<Vec<f64>> {
    a.spmv(x)
}

/// Applies a unitary DFT plan to `x`.
pub fn dft_apply(plan: &DftPlan, x: &[num_complex::Complex64]) -> crate::Result<Vec<num_complex::Complex64>> {
    plan.apply(x)
}
