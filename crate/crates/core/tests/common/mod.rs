#![allow(dead_code)]

use cnpint_core::aao::AaoSystem;
use cnpint_core::linalg::{Definiteness, DenseMatrix, SparseMatrix};
use cnpint_core::spatial::{build_elliptic_1d, Grid1D};
use cnpint_core::spatial::{Datum, SpatialProblem};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `κ u_xx` on `(0, 1)` with `n` interior nodes and zero Dirichlet data.
pub fn heat_problem(n: usize, kappa: f64) -> SpatialProblem {
    let grid = Grid1D::uniform(0.0, 1.0, n).unwrap();
    build_elliptic_1d(move |_| kappa, |_| 0.0, |_| 0.0, &grid, Datum::Constant(0.0), Datum::Constant(0.0)).unwrap()
}

pub fn heat(n: usize) -> SparseMatrix {
    heat_problem(n, 1.0).matrix
}

/// Random symmetric negative semidefinite `−GᵀG/scale`, built with exact symmetry.
pub fn random_nsd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SparseMatrix {
    let rank = rng.random_range(1..=n);
    let g: Vec<Vec<f64>> = (0..rank).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut trip = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v: f64 = -(0..rank).map(|r| g[r][i] * g[r][j]).sum::<f64>() * scale;
            trip.push((i, j, v));
            if i != j {
                trip.push((j, i, v));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, trip).unwrap().with_definiteness(Definiteness::NegativeSemidefinite)
}

/// Random vector with entries in `[-1, 1)`.
pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn d_of(sys: &AaoSystem, k: usize) -> f64 {
    sys.d_profile().map_or(1.0, |d| d[k])
}

/// `B₁⊗I − (D̃B₂)⊗Ã` written out entry by entry from the dense `Ã`.
pub fn dense_aao(sys: &AaoSystem) -> DenseMatrix<f64> {
    let (m, n) = (sys.m_steps(), sys.n_space());
    let a = sys.a_tilde().to_dense();
    DenseMatrix::from_fn(m * n, m * n, |r, c| {
        let (kr, i) = (r / n, r % n);
        let (kc, j) = (c / n, c % n);
        let id = if i == j { 1.0 } else { 0.0 };
        let dk = d_of(sys, kr);
        if kr == kc {
            id - 0.5 * dk * a[(i, j)]
        } else if kc + 1 == kr {
            -id - 0.5 * dk * a[(i, j)]
        } else {
            0.0
        }
    })
}

/// Dense `P_α` with `Q₁,₂ = I ∓ ½d̄Ã` on the diagonal, `−Q₂` below it and
/// `−αQ₂` in the top-right corner.
pub fn dense_palpha(sys: &AaoSystem, alpha: f64, dbar: f64) -> DenseMatrix<f64> {
    let (m, n) = (sys.m_steps(), sys.n_space());
    let a = sys.a_tilde().to_dense();
    DenseMatrix::from_fn(m * n, m * n, |r, c| {
        let (kr, i) = (r / n, r % n);
        let (kc, j) = (c / n, c % n);
        let id = if i == j { 1.0 } else { 0.0 };
        let q1 = id - 0.5 * dbar * a[(i, j)];
        let q2 = id + 0.5 * dbar * a[(i, j)];
        let mut v = 0.0;
        if kr == kc {
            v += q1;
        }
        if kc + 1 == kr {
            v -= q2;
        }
        if kr == 0 && kc == m - 1 {
            v -= alpha * q2;
        }
        v
    })
}

/// Dense `n × m` matrix with entries in `[-1, 1)`.
pub fn random_dense(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DenseMatrix<f64> {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| random_vec(rng, m)).collect();
    DenseMatrix::from_rows(&rows)
}
