//! Dense matrices and the verification oracles built on them.
//!
//! Eigenvalues and singular values are delegated to `faer`; the LU solve is
//! local so singular pivots can be reported by index.

use super::scalar::Scalar;
use crate::error::{Error, Result};
use faer::Mat;
use num_complex::Complex64;
use std::ops::{Index, IndexMut};

/// Largest dimension the dense oracles accept unless a caller opts in to more.
pub const DEFAULT_ORACLE_CAP: usize = 4096;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![T::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Self { nrows, ncols, data: rows.concat() }
    }

    /// Builds a matrix whose `j`-th column is `cols[j]`.
    pub fn from_columns(nrows: usize, cols: &[Vec<T>]) -> Self {
        assert!(cols.iter().all(|c| c.len() == nrows));
        Self::from_fn(nrows, cols.len(), |i, j| cols[j][i])
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let mut acc = T::zero();
                for (a, &b) in self.row(i).iter().zip(x) {
                    acc += *a * b;
                }
                acc
            })
            .collect()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols, rhs.nrows);
        let mut out = Self::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            let orow = &mut out.data[i * rhs.ncols..(i + 1) * rhs.ncols];
            for k in 0..self.ncols {
                let a = self.data[i * self.ncols + k];
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in orow.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: T) -> Self {
        Self { nrows: self.nrows, ncols: self.ncols, data: self.data.iter().map(|&a| a * c).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    pub fn frobenius(&self) -> f64 {
        super::scalar::norm2(&self.data)
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }
}

impl DenseMatrix<f64> {
    pub fn to_complex(&self) -> DenseMatrix<Complex64> {
        DenseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.data[i * self.ncols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.data[i * self.ncols + j]
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> DenseLu<T> {
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
        }
        let n = a.nrows();
        let mut lu = a.data.clone();
        let mut piv = vec![0; n];
        let threshold = f64::EPSILON * (n.max(1) as f64) * a.max_abs();
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].modulus()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= threshold || pmax == 0.0 {
                return Err(Error::SingularMatrix { pivot: k });
            }
            piv[k] = p;
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
            }
            let inv = T::one() / lu[k * n + k];
            for i in k + 1..n {
                let l = lu[i * n + k] * inv;
                lu[i * n + k] = l;
                if l == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= l * u;
                }
            }
        }
        Ok(Self { n, lu, piv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        // rows of L were swapped along with U, so all interchanges go first
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for k in 0..n {
            let bk = b[k];
            for i in k + 1..n {
                b[i] -= self.lu[i * n + k] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * b[j];
            }
            b[i] = s / self.lu[i * n + i];
        }
    }

    /// `A⁻¹ B` column by column.
    pub fn solve_matrix(&self, b: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(b.nrows(), self.n);
        let cols: Vec<Vec<T>> = (0..b.ncols())
            .map(|j| {
                let mut c = b.column(j);
                self.solve_in_place(&mut c);
                c
            })
            .collect();
        DenseMatrix::from_columns(self.n, &cols)
    }
}

/// Solves `A x = b` with partial pivoting. Fails with
/// [`Error::SingularMatrix`] when a pivot is below working precision.
pub fn dense_solve<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.len() });
    }
    let lu = DenseLu::factor(a)?;
    let mut x = b.to_vec();
    lu.solve_in_place(&mut x);
    Ok(x)
}

/// Eigenvalues (sorted by real then imaginary part) with optional
/// eigenvectors stored column-wise in matching order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    pub vectors: Option<DenseMatrix<Complex64>>,
}

/// Types the dense eigen oracle accepts.
pub trait EigenInput: Scalar {
    #[doc(hidden)]
    fn faer_eigen(a: &DenseMatrix<Self>, vectors: bool) -> Result<EigenDecomposition>;
}

fn collect_eigen(
    values: impl Iterator<Item = Complex64>,
    vectors: Option<faer::MatRef<'_, Complex64>>,
) -> EigenDecomposition {
    let values: Vec<Complex64> = values.collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re).then(values[a].im.total_cmp(&values[b].im)));
    let sorted = order.iter().map(|&i| values[i]).collect();
    let vectors = vectors.map(|u| DenseMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]));
    EigenDecomposition { values: sorted, vectors }
}

impl EigenInput for f64 {
    fn faer_eigen(a: &DenseMatrix<f64>, vectors: bool) -> Result<EigenDecomposition> {
        let m = Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
        if vectors {
            let evd = m.eigen().map_err(|_| Error::NoConvergence)?;
            let s = evd.S();
            Ok(collect_eigen(s.column_vector().iter().copied(), Some(evd.U())))
        } else {
            let vals = m.eigenvalues().map_err(|_| Error::NoConvergence)?;
            Ok(collect_eigen(vals.into_iter(), None))
        }
    }
}

impl EigenInput for Complex64 {
    fn faer_eigen(a: &DenseMatrix<Complex64>, vectors: bool) -> Result<EigenDecomposition> {
        let m = Mat::<Complex64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
        if vectors {
            let evd = m.eigen().map_err(|_| Error::NoConvergence)?;
            let s = evd.S();
            Ok(collect_eigen(s.column_vector().iter().copied(), Some(evd.U())))
        } else {
            let vals = m.eigenvalues().map_err(|_| Error::NoConvergence)?;
            Ok(collect_eigen(vals.into_iter(), None))
        }
    }
}

/// Dense eigen-decomposition capped at [`DEFAULT_ORACLE_CAP`].
pub fn dense_eig<T: EigenInput>(a: &DenseMatrix<T>, vectors: bool) -> Result<EigenDecomposition> {
    dense_eig_capped(a, vectors, DEFAULT_ORACLE_CAP)
}

pub fn dense_eig_capped<T: EigenInput>(a: &DenseMatrix<T>, vectors: bool, cap: usize) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    check_cap(a.nrows(), cap)?;
    if a.nrows() == 0 {
        return Ok(EigenDecomposition { values: Vec::new(), vectors: vectors.then(|| DenseMatrix::zeros(0, 0)) });
    }
    T::faer_eigen(a, vectors)
}

pub(crate) fn check_cap(size: usize, cap: usize) -> Result<()> {
    if size > cap {
        Err(Error::OracleCap { size, cap })
    } else {
        Ok(())
    }
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &DenseMatrix<f64>) -> Result<Vec<f64>> {
    check_cap(a.nrows().max(a.ncols()), DEFAULT_ORACLE_CAP)?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let m = Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    m.singular_values().map_err(|_| Error::NoConvergence)
}

pub fn singular_values_complex(a: &DenseMatrix<Complex64>) -> Result<Vec<f64>> {
    check_cap(a.nrows().max(a.ncols()), DEFAULT_ORACLE_CAP)?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let m = Mat::<Complex64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    m.singular_values().map_err(|_| Error::NoConvergence)
}

/// Spectral norm `‖A‖₂`.
pub fn norm2_dense(a: &DenseMatrix<f64>) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eig_diagonal() {
        let a = DenseMatrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]]);
        let e = dense_eig(&a, false).unwrap();
        let re: Vec<f64> = e.values.iter().map(|z| z.re).collect();
        assert!((re[0] - 1.0).abs() < 1e-14 && (re[1] - 2.0).abs() < 1e-14 && (re[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rotation() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let e = dense_eig(&a, true).unwrap();
        assert!((e.values[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((e.values[1] - c(0.0, 1.0)).norm() < 1e-14);
        let v = e.vectors.unwrap();
        let ac = a.to_complex();
        for k in 0..2 {
            let col = v.column(k);
            let av = ac.matvec(&col);
            let res: f64 = av.iter().zip(&col).map(|(x, y)| (x - e.values[k] * y).norm_sqr()).sum();
            assert!(res.sqrt() < 1e-10);
        }
    }

    #[test]
    fn eig_b1_gram_m2() {
        // B1 = tridiag(-1, 1, 0) at M = 2, so B1ᵀB1 = [[2, -1], [-1, 1]]
        let a = DenseMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 1.0]]);
        let e = dense_eig(&a, false).unwrap();
        let s5 = 5.0_f64.sqrt();
        assert!((e.values[0].re - (3.0 - s5) / 2.0).abs() < 1e-14);
        assert!((e.values[1].re - (3.0 + s5) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn eig_over_cap() {
        let a = DenseMatrix::<f64>::identity(5);
        assert!(matches!(dense_eig_capped(&a, false, 4), Err(Error::OracleCap { size: 5, cap: 4 })));
    }

    #[test]
    fn solve_identity_and_diag() {
        let i4 = DenseMatrix::<f64>::identity(4);
        assert_eq!(dense_solve(&i4, &[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        let d = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]);
        assert_eq!(dense_solve(&d, &[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn solve_rank_deficient() {
        let a = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![0.0, 0.0]]);
        assert!(matches!(dense_solve(&a, &[1.0, 1.0]), Err(Error::SingularMatrix { pivot: 1 })));
    }

    #[test]
    fn singular_values_of_b1() {
        let b1 = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 1.0]]);
        let s = singular_values(&b1).unwrap();
        let cond = s[0] / s[1];
        let expected = ((3.0 + 5f64.sqrt()) / (3.0 - 5f64.sqrt())).sqrt();
        assert!((cond - expected).abs() < 1e-12);
    }
}
