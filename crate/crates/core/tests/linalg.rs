mod common;

use cnpint_core::linalg::{
    dense_eig, dense_solve, dft_apply, spmv, BandLu, DenseMatrix, DftDirection, DftPlan, Ordering, SparseMatrix,
};
use cnpint_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_sparse(seed: u64, nrows: usize, ncols: usize, nnz: usize) -> SparseMatrix {
    let mut r = common::rng(seed);
    let trip: Vec<_> =
        (0..nnz).map(|_| (r.random_range(0..nrows), r.random_range(0..ncols), r.random_range(-10.0..10.0))).collect();
    SparseMatrix::from_triplets(nrows, ncols, trip).unwrap()
}

#[test]
fn spmv_examples() {
    assert_eq!(spmv(&SparseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    assert_eq!(spmv(&SparseMatrix::zeros(2, 2), &[5.0, 7.0]).unwrap(), vec![0.0, 0.0]);
    let t = SparseMatrix::tridiagonal(3, -1.0, 2.0, -1.0);
    assert_eq!(spmv(&t, &[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 0.0, 1.0]);
    assert!(matches!(spmv(&t, &[1.0, 1.0]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn csr_invariants() {
    let a = random_sparse(3, 40, 30, 500);
    let off = a.row_offsets();
    assert_eq!(off.len(), 41);
    assert!(off.windows(2).all(|w| w[0] <= w[1]));
    assert!(a.col_indices().iter().all(|&j| j < 30));
    let s = common::random_nsd(&mut common::rng(4), 12, 1.0);
    assert!(s.flags().symmetric);
    for i in 0..12 {
        for (j, v) in s.row(i) {
            assert_eq!(s.get(j, i), v);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spmv_is_additive(seed in any::<u64>(), nrows in 1usize..300, ncols in 1usize..300, nnz in 0usize..10_000) {
        let a = random_sparse(seed, nrows, ncols, nnz);
        let mut r = common::rng(seed ^ 0x5eed);
        let x = common::random_vec(&mut r, ncols);
        let y = common::random_vec(&mut r, ncols);
        let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let lhs = spmv(&a, &xy).unwrap();
        let ax = spmv(&a, &x).unwrap();
        let ay = spmv(&a, &y).unwrap();
        let rhs: Vec<f64> = ax.iter().zip(&ay).map(|(a, b)| a + b).collect();
        let scale = a.norm_inf() * 2.0 + 1.0;
        for (l, r) in lhs.iter().zip(&rhs) {
            prop_assert!((l - r).abs() <= 1e-14 * scale * 8.0);
        }
    }

    #[test]
    fn dense_solve_inverts_products(seed in any::<u64>(), n in 1usize..200) {
        let mut r = common::rng(seed);
        // diagonal dominance keeps the systems well conditioned
        let noise = common::random_dense(&mut r, n, n);
        let a = DenseMatrix::from_fn(n, n, |i, j| if i == j { noise[(i, j)] + 2.0 * n as f64 } else { noise[(i, j)] });
        let x = common::random_vec(&mut r, n);
        let b = a.matvec(&x);
        let y = dense_solve(&a, &b).unwrap();
        prop_assert!(common::rel_diff(&y, &x) <= 1e-10);
    }

    #[test]
    fn dft_is_unitary(seed in any::<u64>(), m in 1usize..130) {
        let mut r = common::rng(seed);
        let x: Vec<Complex64> = (0..m).map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
        let fwd = DftPlan::new(m, DftDirection::Forward);
        let inv = DftPlan::new(m, DftDirection::Inverse);
        let y = dft_apply(&fwd, &x).unwrap();
        let nx = cnpint_core::linalg::norm2(&x);
        prop_assert!((cnpint_core::linalg::norm2(&y) - nx).abs() <= 1e-13 * nx);
        let z = dft_apply(&inv, &y).unwrap();
        let err: f64 = z.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-13 * nx);
    }

    #[test]
    fn banded_lu_matches_dense(seed in any::<u64>(), n in 2usize..80, bw in 1usize..6) {
        let mut r = common::rng(seed);
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 4.0 * bw as f64 + r.random_range(0.0..1.0)));
            for d in 1..=bw {
                if i + d < n {
                    trip.push((i, i + d, r.random_range(-1.0..1.0)));
                    trip.push((i + d, i, r.random_range(-1.0..1.0)));
                }
            }
        }
        // a random symmetric relabelling so reordering has something to undo
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, r.random_range(0..=i));
        }
        let a = SparseMatrix::from_triplets(n, n, trip.into_iter().map(|(i, j, v)| (perm[i], perm[j], v))).unwrap();
        let b = common::random_vec(&mut r, n);
        let expect = dense_solve(&a.to_dense(), &b).unwrap();
        for ord in [Ordering::Natural, Ordering::ReverseCuthillMcKee, Ordering::Auto] {
            let lu = BandLu::factor(&a, ord).unwrap();
            let mut x = b.clone();
            lu.solve_in_place(&mut x);
            prop_assert!(common::rel_diff(&x, &expect) <= 1e-12);
        }
    }
}

#[test]
fn dense_solve_examples() {
    let id = DenseMatrix::<f64>::identity(4);
    assert_eq!(dense_solve(&id, &[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
    let d = DenseMatrix::from_rows(&[vec![c(2.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(4.0, 0.0)]]);
    let x = dense_solve(&d, &[c(2.0, 0.0), c(4.0, 0.0)]).unwrap();
    assert!((x[0] - 1.0).norm() < 1e-15 && (x[1] - 1.0).norm() < 1e-15);
    let s = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![0.0, 0.0]]);
    assert!(matches!(dense_solve(&s, &[1.0, 1.0]), Err(Error::SingularMatrix { .. })));
}

#[test]
fn dense_eig_examples() {
    let d = DenseMatrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]]);
    let e = dense_eig(&d, false).unwrap().values;
    for (z, want) in e.iter().zip([1.0, 2.0, 3.0]) {
        assert!((z - want).norm() < 1e-13);
    }
    let rot = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
    let e = dense_eig(&rot, false).unwrap().values;
    assert!((e[0] - c(0.0, -1.0)).norm() < 1e-14);
    assert!((e[1] - c(0.0, 1.0)).norm() < 1e-14);
    // B₁ᵀB₁ for M = 2 with B₁ = tridiag(−1, 1, 0)
    let b1 = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 1.0]]);
    let e = dense_eig(&b1.transpose().matmul(&b1), false).unwrap().values;
    let r5 = 5f64.sqrt();
    assert!((e[0] - (3.0 - r5) / 2.0).norm() < 1e-14);
    assert!((e[1] - (3.0 + r5) / 2.0).norm() < 1e-14);
}

#[test]
fn eigenpair_residuals() {
    let mut r = common::rng(11);
    let n = 30;
    let a = common::random_dense(&mut r, n, n);
    let eig = dense_eig(&a, true).unwrap();
    let v = eig.vectors.unwrap();
    let ac = a.to_complex();
    let anorm = a.frobenius();
    for (q, &lam) in eig.values.iter().enumerate() {
        let x = v.column(q);
        let ax = ac.matvec(&x);
        let res: f64 = ax.iter().zip(&x).map(|(p, xx)| (p - lam * xx).norm_sqr()).sum::<f64>().sqrt();
        assert!(res <= 1e-10 * anorm);
    }
}

#[test]
fn dft_examples() {
    let fwd = DftPlan::new(4, DftDirection::Forward);
    let y = dft_apply(&fwd, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
    assert!(y.iter().all(|z| (z - 0.5).norm() < 1e-15));
    let y = dft_apply(&fwd, &[c(1.0, 0.0); 4]).unwrap();
    assert!((y[0] - 2.0).norm() < 1e-15);
    assert!(y[1..].iter().all(|z| z.norm() < 1e-15));
    // ω = e^{−2πi/M}: the forward image of e_1 is ω^j/√M
    let y = dft_apply(&fwd, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
    assert!((y[1] - c(0.0, -0.5)).norm() < 1e-15);
    assert!(dft_apply(&fwd, &[c(1.0, 0.0)]).is_err());
}
