//! Banded LU with partial pivoting and an optional bandwidth-reducing
//! ordering (reverse Cuthill–McKee).
//!
//! The spatial matrices here come from local stencils, so after ordering
//! they have a small bandwidth and a banded factorization is cheap.

use super::scalar::Scalar;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ordering {
    Natural,
    ReverseCuthillMcKee,
    /// Whichever of the two gives the cheaper band factorization.
    #[default]
    Auto,
}

/// Reverse Cuthill–McKee permutation, `perm[new] = old`, of the symmetrized
/// pattern of `a`.
pub fn reverse_cuthill_mckee<T: Scalar>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for nb in &mut adj {
        nb.sort_unstable();
        nb.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]).expect("unvisited node remains");
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut next: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
            next.sort_by_key(|&v| (degree[v], v));
            for v in next {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

fn band_cost(kl: usize, ku: usize) -> usize {
    kl * (kl + ku + 1)
}

/// LU factors of a banded matrix, `P A Pᵀ = L U` up to row interchanges.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    upper: Vec<T>,
    lower: Vec<T>,
    piv: Vec<usize>,
    perm: Option<Vec<usize>>,
}

impl<T: Scalar> BandLu<T> {
    pub fn factor(a: &CsrMatrix<T>, ordering: Ordering) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
        }
        let (kl0, ku0) = a.bandwidths();
        let perm = match ordering {
            Ordering::Natural => None,
            Ordering::ReverseCuthillMcKee => Some(reverse_cuthill_mckee(a)),
            Ordering::Auto => {
                let p = reverse_cuthill_mckee(a);
                let (kl1, ku1) = a.permuted(&p).bandwidths();
                (band_cost(kl1, ku1) < band_cost(kl0, ku0)).then_some(p)
            }
        };
        match perm {
            Some(p) => {
                let pa = a.permuted(&p);
                let mut lu = Self::factor_natural(&pa)?;
                // report pivots in the caller's numbering
                lu.perm = Some(p);
                Ok(lu)
            }
            None => Self::factor_natural(a),
        }
    }

    fn factor_natural(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut upper = vec![T::zero(); n * width];
        for i in 0..n {
            for (j, v) in a.row(i) {
                upper[i * width + (j + kl - i)] += v;
            }
        }
        let threshold = f64::EPSILON * a.norm_inf();
        let mut lower = vec![T::zero(); n * kl];
        let mut piv = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n.saturating_sub(1));
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut pmax = -1.0;
            for i in k..=last_row {
                let m = upper[i * width + kl + k - i].modulus();
                if m > pmax {
                    pmax = m;
                    p = i;
                }
            }
            if pmax <= threshold || pmax == 0.0 {
                return Err(Error::SingularMatrix { pivot: k });
            }
            piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    upper.swap(k * width + j + kl - k, p * width + j + kl - p);
                }
            }
            let len = last_col - k + 1;
            let (head, tail) = upper.split_at_mut((k + 1) * width);
            let pivot_row = &head[k * width + kl..k * width + kl + len];
            let inv = T::one() / pivot_row[0];
            for i in k + 1..=last_row {
                let off = (i - k - 1) * width;
                let start = off + kl + k - i;
                let row = &mut tail[start..start + len];
                let l = row[0] * inv;
                lower[k * kl + (i - k - 1)] = l;
                row[0] = T::zero();
                if l == T::zero() {
                    continue;
                }
                for (r, &u) in row[1..].iter_mut().zip(&pivot_row[1..]) {
                    *r -= l * u;
                }
            }
        }
        Ok(Self { n, kl, ku, width, upper, lower, piv, perm: None })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn solve_natural(&self, b: &mut [T]) {
        let n = self.n;
        let (kl, w) = (self.kl, self.width);
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            if bk == T::zero() {
                continue;
            }
            let last_row = (k + kl).min(n - 1);
            for i in k + 1..=last_row {
                b[i] -= self.lower[k * kl + (i - k - 1)] * bk;
            }
        }
        for i in (0..n).rev() {
            let last_col = (i + kl + self.ku).min(n - 1);
            let row = &self.upper[i * w + kl..i * w + kl + (last_col - i + 1)];
            let mut s = b[i];
            for (u, x) in row[1..].iter().zip(&b[i + 1..=last_col]) {
                s -= *u * *x;
            }
            b[i] = s / row[0];
        }
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        assert_eq!(b.len(), self.n, "band solve dimension mismatch");
        match &self.perm {
            None => self.solve_natural(b),
            Some(p) => {
                let mut y: Vec<T> = p.iter().map(|&old| b[old]).collect();
                self.solve_natural(&mut y);
                for (new, &old) in p.iter().enumerate() {
                    b[old] = y[new];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::{dense_solve, DenseMatrix};
    use crate::linalg::sparse::SparseMatrix;
    use num_complex::Complex64;

    #[test]
    fn solves_tridiagonal() {
        let a = SparseMatrix::tridiagonal(6, -1.0, 2.0, -1.0);
        let lu = BandLu::factor(&a, Ordering::Natural).unwrap();
        let mut b = vec![1.0; 6];
        lu.solve_in_place(&mut b);
        let r = a.spmv(&b).unwrap();
        for v in r {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn pivoting_needed() {
        // zero leading entry forces a row swap
        let a = SparseMatrix::from_triplets(
            3,
            3,
            [(0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 2, 3.0), (1, 2, 2.0), (2, 1, 1.0)],
        )
        .unwrap();
        let lu = BandLu::factor(&a, Ordering::Natural).unwrap();
        let mut x = vec![1.0, 2.0, 3.0];
        let b = x.clone();
        lu.solve_in_place(&mut x);
        let expect = dense_solve(&a.to_dense(), &b).unwrap();
        for (u, v) in x.iter().zip(&expect) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_row_is_singular() {
        let a = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        assert!(matches!(BandLu::factor(&a, Ordering::Natural), Err(Error::SingularMatrix { pivot: 1 })));
    }

    #[test]
    fn rcm_reduces_bandwidth_of_shuffled_path() {
        // path graph numbered 0, 4, 1, 3, 2 along the chain
        let chain = [0usize, 4, 1, 3, 2];
        let mut t = Vec::new();
        for w in chain.windows(2) {
            t.push((w[0], w[1], -1.0));
            t.push((w[1], w[0], -1.0));
        }
        for i in 0..5 {
            t.push((i, i, 4.0));
        }
        let a = SparseMatrix::from_triplets(5, 5, t).unwrap();
        assert!(a.bandwidths().0 > 1);
        let p = reverse_cuthill_mckee(&a);
        assert_eq!(a.permuted(&p).bandwidths(), (1, 1));
        let lu = BandLu::factor(&a, Ordering::Auto).unwrap();
        let mut x = vec![1.0, -2.0, 0.5, 3.0, 1.0];
        let b = x.clone();
        lu.solve_in_place(&mut x);
        let r = a.spmv(&x).unwrap();
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn complex_shifted_solve_matches_dense() {
        let a = SparseMatrix::tridiagonal(8, 1.0, -2.0, 1.0);
        let s = a.to_complex().shifted(Complex64::new(0.3, 0.4), Complex64::new(-0.5, 0.1));
        let lu = BandLu::factor(&s, Ordering::Auto).unwrap();
        let b: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        let dense: DenseMatrix<Complex64> = s.to_dense();
        let y = dense_solve(&dense, &b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).norm() < 1e-13);
        }
    }
}
