//! Parallel-in-time Crank–Nicolson solvers built on an all-at-once
//! space-time system and a block α-circulant preconditioner.

// NaN-rejecting guards are written as negated comparisons on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod aao;
pub mod analysis;
pub mod error;
pub mod krylov;
pub mod linalg;
pub mod par;
pub mod precond;
pub mod pricing;
pub mod spatial;

pub use error::{Error, Result};
