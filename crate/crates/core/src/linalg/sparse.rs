//! Compressed-sparse-row matrices.

use super::dense::DenseMatrix;
use super::scalar::Scalar;
use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Definiteness {
    NegativeSemidefinite,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatrixFlags {
    pub symmetric: bool,
    pub definiteness: Definiteness,
}

/// CSR matrix over `f64` or `Complex64`. Complex values are stored as
/// `Complex64`, i.e. interleaved `(re, im)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<T>,
    flags: MatrixFlags,
}

/// The real spatial matrices `A` and `Ã = τA`.
pub type SparseMatrix = CsrMatrix<f64>;
pub type ComplexSparseMatrix = CsrMatrix<Complex64>;

impl<T: Scalar> CsrMatrix<T> {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and explicit zeros are kept so the sparsity pattern is predictable.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); nrows];
        for (i, j, v) in triplets {
            if i >= nrows {
                return Err(Error::DimensionMismatch { expected: nrows, found: i + 1 });
            }
            if j >= ncols {
                return Err(Error::DimensionMismatch { expected: ncols, found: j + 1 });
            }
            rows[i].push((j, v));
        }
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut iter = row.into_iter().peekable();
            while let Some((j, mut v)) = iter.next() {
                while let Some(&(j2, v2)) = iter.peek() {
                    if j2 != j {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                col_indices.push(j);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        let mut m = Self { nrows, ncols, row_offsets, col_indices, values, flags: MatrixFlags::default() };
        m.flags.symmetric = m.is_exactly_symmetric();
        Ok(m)
    }

    pub fn from_dense(a: &DenseMatrix<T>) -> Self {
        let triplets = (0..a.nrows()).flat_map(|i| {
            (0..a.ncols()).filter_map(move |j| {
                let v = a[(i, j)];
                (v != T::zero()).then_some((i, j, v))
            })
        });
        Self::from_triplets(a.nrows(), a.ncols(), triplets).expect("indices in range")
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![T::one(); n],
            flags: MatrixFlags::default(),
        };
        m.flags.symmetric = true;
        m
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
            flags: MatrixFlags { symmetric: nrows == ncols, definiteness: Definiteness::Unknown },
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn flags(&self) -> MatrixFlags {
        self.flags
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Overrides the definiteness metadata. Symmetry is always recomputed
    /// from the stored entries and cannot be set by hand.
    pub fn with_definiteness(mut self, d: Definiteness) -> Self {
        self.flags.definiteness = d;
        self
    }

    /// `(column, value)` pairs stored in row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        self.col_indices[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        match self.col_indices[lo..hi].binary_search(&j) {
            Ok(p) => self.values[lo + p],
            Err(_) => T::zero(),
        }
    }

    pub fn is_exactly_symmetric(&self) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        (0..self.nrows).all(|i| {
            self.row(i).all(|(j, v)| {
                let lo = self.row_offsets[j];
                let hi = self.row_offsets[j + 1];
                match self.col_indices[lo..hi].binary_search(&i) {
                    Ok(p) => self.values[lo + p] == v,
                    Err(_) => false,
                }
            })
        })
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[T]) -> Result<Vec<T>> {
        let mut y = vec![T::zero(); self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[T], y: &mut [T]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, found: x.len() });
        }
        if y.len() != self.nrows {
            return Err(Error::DimensionMismatch { expected: self.nrows, found: y.len() });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            *yi = acc;
        }
        Ok(())
    }

    /// `y = Aᵀ x` (plain transpose, no conjugation).
    pub fn spmv_transpose(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.nrows {
            return Err(Error::DimensionMismatch { expected: self.nrows, found: x.len() });
        }
        let mut y = vec![T::zero(); self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v * xi;
            }
        }
        Ok(y)
    }

    /// `shift·I + scale·A` for a square matrix, keeping the pattern of `A`
    /// plus the diagonal.
    pub fn shifted(&self, shift: T, scale: T) -> Self {
        assert_eq!(self.nrows, self.ncols, "shifted() needs a square matrix");
        let triplets = (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, scale * v)))
            .chain((0..self.nrows).map(|i| (i, i, shift)));
        let mut m = Self::from_triplets(self.nrows, self.ncols, triplets).expect("square");
        m.flags.definiteness = Definiteness::Unknown;
        m
    }

    pub fn scaled(&self, c: T) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= c);
        m.flags.symmetric = m.is_exactly_symmetric();
        if c.imag() != 0.0 || c.real() < 0.0 {
            m.flags.definiteness = Definiteness::Unknown;
        }
        m
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            flags: self.flags,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    /// Lower and upper bandwidths `(kl, ku)` of the stored pattern.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.nrows {
            for (j, _) in self.row(i) {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }

    /// Largest absolute row sum (the induced ∞-norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v.modulus()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `P A Pᵀ` where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(self.nrows, self.ncols);
        assert_eq!(perm.len(), self.nrows);
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let triplets = (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (inv[i], inv[j], v))
            .collect::<Vec<_>>();
        let mut m = Self::from_triplets(self.nrows, self.ncols, triplets).expect("permutation");
        m.flags.definiteness = self.flags.definiteness;
        m
    }

    /// Returns `(diag, off)` when the matrix is a symmetric tridiagonal
    /// Toeplitz matrix `tridiag(off, diag, off)`.
    pub fn as_symmetric_toeplitz_tridiagonal(&self) -> Option<(T, T)> {
        let n = self.nrows;
        if n != self.ncols || n == 0 || !self.flags.symmetric {
            return None;
        }
        let diag = self.get(0, 0);
        let off = if n > 1 { self.get(0, 1) } else { T::zero() };
        for i in 0..n {
            for (j, v) in self.row(i) {
                let ok = match j.abs_diff(i) {
                    0 => v == diag,
                    1 => v == off,
                    _ => v == T::zero(),
                };
                if !ok {
                    return None;
                }
            }
            if self.get(i, i) != diag {
                return None;
            }
            if i + 1 < n && self.get(i, i + 1) != off {
                return None;
            }
        }
        Some((diag, off))
    }
}

impl SparseMatrix {
    pub fn to_complex(&self) -> ComplexSparseMatrix {
        self.map(|v| Complex64::new(v, 0.0))
    }

    /// `tridiag(lower, diag, upper)` of size `n`.
    pub fn tridiagonal(n: usize, lower: f64, diag: f64, upper: f64) -> Self {
        let mut t = Vec::with_capacity(3 * n);
        for i in 0..n {
            if i > 0 {
                t.push((i, i - 1, lower));
            }
            t.push((i, i, diag));
            if i + 1 < n {
                t.push((i, i + 1, upper));
            }
        }
        Self::from_triplets(n, n, t).expect("in range")
    }

    /// Estimates `‖A‖₂` by power iteration on `AᵀA`.
    pub fn norm2_estimate(&self, tol: f64, max_iter: usize) -> f64 {
        let n = self.ncols;
        if n == 0 || self.nnz() == 0 {
            return 0.0;
        }
        // deterministic start vector that is not orthogonal to typical
        // dominant singular vectors
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618).sin()).collect();
        let nx = super::scalar::norm2(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let mut sigma = 0.0;
        for _ in 0..max_iter {
            let y = self.spmv(&x).expect("square dims");
            let z = self.spmv_transpose(&y).expect("dims");
            let nz = super::scalar::norm2(&z);
            if nz == 0.0 {
                return 0.0;
            }
            let next = nz.sqrt();
            x = z.into_iter().map(|v| v / nz).collect();
            if (next - sigma).abs() <= tol * next {
                return next;
            }
            sigma = next;
        }
        sigma
    }
}
