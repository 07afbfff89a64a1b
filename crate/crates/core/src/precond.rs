//! Block α-circulant preconditioner
//! `P_α = C₁^{(α)} ⊗ I − d̄ C₂^{(α)} ⊗ Ã`.
//!
//! `P_α` is diagonalized in time by `V = Λ_α⁻¹𝔽*`, so applying `P_α⁻¹`
//! takes a scaled DFT across the time index, `M` independent complex shifted
//! solves `(λ_{1,k}I − d̄λ_{2,k}Ã)z = r`, and the inverse transform. For real
//! input only the first `⌈(M+1)/2⌉` shifted systems need solving; the rest
//! are conjugates.
//!
//! The unitary DFT with ω = e^{−2πi/M} maps frequency `j` to eigenvalue
//! index `k − 1 = (M − j) mod M` of the closed-form lists.

use crate::aao::AaoSystem;
use crate::error::{Error, Result};
use crate::linalg::{
    BandLu, BlockVector, ComplexSparseMatrix, DenseMatrix, DftDirection, DftPlan, Ordering, SparseMatrix,
};
use crate::par;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Arc;

/// Relative size of the discarded imaginary part that is tolerated.
pub const IMAG_DISCARD_TOL: f64 = 1e-8;

/// Default α used by every experiment table.
pub const DEFAULT_ALPHA: f64 = 1e-3;

/// `α = δ√(τ/T)`.
pub fn alpha_policy(delta: f64, tau: f64, t_final: f64) -> f64 {
    delta * (tau / t_final).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    /// Solve `⌈(M+1)/2⌉` systems and conjugate the rest.
    #[default]
    Halved,
    /// Solve all `M` systems.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecondOptions {
    pub mode: SolveMode,
    /// Use the sine-transform path when `Ã` is a symmetric Toeplitz tridiagonal.
    pub allow_spectral: bool,
    pub ordering: Ordering,
}

impl Default for PrecondOptions {
    fn default() -> Self {
        Self { mode: SolveMode::Halved, allow_spectral: true, ordering: Ordering::Auto }
    }
}

/// Orthonormal DST-I of a symmetric Toeplitz tridiagonal `Ã = tridiag(e, d, e)`.
struct SineBasis {
    n: usize,
    eigenvalues: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl SineBasis {
    fn new(n: usize, diag: f64, off: f64) -> Self {
        let eigenvalues =
            (1..=n).map(|m| diag + 2.0 * off * (m as f64 * std::f64::consts::PI / (n + 1) as f64).cos()).collect();
        let fft = FftPlanner::new().plan_fft_forward(2 * n + 2);
        Self { n, eigenvalues, fft }
    }

    /// Orthonormal DST-I of a real vector via the odd extension.
    fn transform_real(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let len = 2 * n + 2;
        let mut y = vec![Complex64::new(0.0, 0.0); len];
        for i in 0..n {
            y[i + 1] = Complex64::new(x[i], 0.0);
            y[len - 1 - i] = Complex64::new(-x[i], 0.0);
        }
        self.fft.process(&mut y);
        // the transform of an odd real sequence is imaginary
        let scale = -0.5 * (2.0 / (n + 1) as f64).sqrt();
        for m in 0..n {
            out[m] = scale * y[m + 1].im;
        }
    }

    /// In-place orthonormal DST-I; it is its own inverse. Real and
    /// imaginary parts are transformed separately so conjugate inputs give
    /// exactly conjugate outputs.
    fn transform(&self, x: &mut [Complex64]) {
        let re: Vec<f64> = x.iter().map(|c| c.re).collect();
        let im: Vec<f64> = x.iter().map(|c| c.im).collect();
        let (mut tr, mut ti) = (vec![0.0; self.n], vec![0.0; self.n]);
        self.transform_real(&re, &mut tr);
        self.transform_real(&im, &mut ti);
        for (c, (a, b)) in x.iter_mut().zip(tr.into_iter().zip(ti)) {
            *c = Complex64::new(a, b);
        }
    }
}

enum ShiftedSolver {
    Banded(BandLu<Complex64>),
    /// Diagonal in the sine basis: stores `1/(λ₁ − d̄λ₂μ_m)`.
    Spectral(Vec<Complex64>),
}

pub struct AlphaPreconditioner {
    alpha: f64,
    m_steps: usize,
    n_space: usize,
    lambda1: Vec<Complex64>,
    lambda2: Vec<Complex64>,
    dbar: f64,
    gamma: Vec<f64>,
    a_tilde: SparseMatrix,
    mode: SolveMode,
    ordering: Ordering,
    /// Indexed by DFT frequency; `None` for frequencies recovered by conjugation.
    solvers: Vec<Option<ShiftedSolver>>,
    sine: Option<SineBasis>,
    forward: DftPlan,
    inverse: DftPlan,
    factorizations: usize,
    applications: AtomicUsize,
}

impl fmt::Debug for AlphaPreconditioner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlphaPreconditioner")
            .field("alpha", &self.alpha)
            .field("m_steps", &self.m_steps)
            .field("n_space", &self.n_space)
            .field("dbar", &self.dbar)
            .field("mode", &self.mode)
            .field("spectral", &self.sine.is_some())
            .field("factorizations", &self.factorizations)
            .finish()
    }
}

/// `(λ_{1,k}, λ_{2,k})` for `k = 1..=M`, built from one table of
/// `e^{2(k−1)πi/M}` whose upper half is the conjugate of the lower half.
pub fn eigenvalue_lists(alpha: f64, m: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let a = alpha.powf(1.0 / m as f64);
    let mut ex = vec![Complex64::new(1.0, 0.0); m];
    for k in 1..=m / 2 {
        let th = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
        ex[k] = Complex64::new(th.cos(), th.sin());
        ex[m - k] = ex[k].conj();
    }
    if m.is_multiple_of(2) && m > 0 {
        ex[m / 2] = Complex64::new(-1.0, 0.0);
    }
    let l1 = ex.iter().map(|e| Complex64::new(1.0, 0.0) - a * e).collect();
    let l2 = ex.iter().map(|e| Complex64::new(0.5, 0.0) + 0.5 * a * e).collect();
    (l1, l2)
}

/// Eigenvalue-list index `k − 1` that belongs to DFT frequency `j`.
fn eig_index(j: usize, m: usize) -> usize {
    (m - j) % m
}

impl AlphaPreconditioner {
    pub fn build(alpha: f64, sys: &AaoSystem) -> Result<Self> {
        Self::build_with(alpha, sys, PrecondOptions::default())
    }

    pub fn build_with(alpha: f64, sys: &AaoSystem, opts: PrecondOptions) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 1]")));
        }
        let m = sys.m_steps();
        let n = sys.n_space();
        let (lambda1, lambda2) = eigenvalue_lists(alpha, m);
        let dbar = sys.dbar();
        let gamma: Vec<f64> = (0..m).map(|k| alpha.powf(k as f64 / m as f64)).collect();
        let a_tilde = sys.a_tilde().clone();

        let solved: Vec<bool> = (0..m)
            .map(|j| match opts.mode {
                SolveMode::Full => true,
                // eigen index k − 1 < ⌈(M+1)/2⌉
                SolveMode::Halved => eig_index(j, m) < (m + 2) / 2,
            })
            .collect();

        let sine = if opts.allow_spectral {
            a_tilde.as_symmetric_toeplitz_tridiagonal().map(|(d, e)| SineBasis::new(n, d, e))
        } else {
            None
        };

        let solvers = build_solvers(&lambda1, &lambda2, dbar, &a_tilde, sine.as_ref(), &solved, opts.ordering)?;
        let factorizations = solvers.iter().filter(|s| matches!(s, Some(ShiftedSolver::Banded(_)))).count();
        Ok(Self {
            alpha,
            m_steps: m,
            n_space: n,
            lambda1,
            lambda2,
            dbar,
            gamma,
            a_tilde,
            mode: opts.mode,
            ordering: opts.ordering,
            solvers,
            sine,
            forward: DftPlan::new(m, DftDirection::Forward),
            inverse: DftPlan::new(m, DftDirection::Inverse),
            factorizations,
            applications: AtomicUsize::new(0),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn m_steps(&self) -> usize {
        self.m_steps
    }

    pub fn n_space(&self) -> usize {
        self.n_space
    }

    pub fn dim(&self) -> usize {
        self.m_steps * self.n_space
    }

    pub fn lambda1(&self) -> &[Complex64] {
        &self.lambda1
    }

    pub fn lambda2(&self) -> &[Complex64] {
        &self.lambda2
    }

    pub fn dbar(&self) -> f64 {
        self.dbar
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn mode(&self) -> SolveMode {
        self.mode
    }

    pub fn uses_sine_transform(&self) -> bool {
        self.sine.is_some()
    }

    /// Number of sparse LU factorizations performed by `build`.
    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    /// Number of shifted systems solved per application.
    pub fn solved_systems(&self) -> usize {
        self.solvers.iter().filter(|s| s.is_some()).count()
    }

    /// Number of completed `apply_inverse` calls.
    pub fn applications(&self) -> usize {
        self.applications.load(AtomicOrdering::Relaxed)
    }

    /// Replaces the eigenvalue lists and refactors the shifted blocks with them.
    /// Only meant for negative controls in the verification suite.
    pub fn corrupt_eigenvalues(&mut self, lambda1: Vec<Complex64>, lambda2: Vec<Complex64>) -> Result<()> {
        let m = self.m_steps;
        if lambda1.len() != m || lambda2.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: lambda1.len().min(lambda2.len()) });
        }
        let solved: Vec<bool> = self.solvers.iter().map(Option::is_some).collect();
        self.solvers =
            build_solvers(&lambda1, &lambda2, self.dbar, &self.a_tilde, self.sine.as_ref(), &solved, self.ordering)?;
        self.lambda1 = lambda1;
        self.lambda2 = lambda2;
        Ok(())
    }

    /// Step (a): `z = (𝔽Λ_α ⊗ I)v`, returned frequency-major (`M` blocks of `N`).
    fn to_frequency(&self, v: &[f64]) -> Vec<Complex64> {
        let (m, n) = (self.m_steps, self.n_space);
        let mut w = vec![Complex64::new(0.0, 0.0); m * n];
        par::for_each_chunk_mut(&mut w, m, |j, series| {
            for (k, s) in series.iter_mut().enumerate() {
                *s = Complex64::new(self.gamma[k] * v[k * n + j], 0.0);
            }
            self.forward.apply_in_place(series).expect("length fixed at build");
            // the transform of real data is Hermitian; impose it exactly
            series[0].im = 0.0;
            for k in 1..=(m - 1) / 2 {
                series[m - k] = series[k].conj();
            }
            if m % 2 == 0 {
                series[m / 2].im = 0.0;
            }
        });
        transpose(&w, n, m)
    }

    /// Step (c): `(Λ_α⁻¹𝔽* ⊗ I)z` with `z` frequency-major, real part into `out`.
    /// Returns `(‖Im‖₂, ‖Re‖₂)`.
    fn frequency_to_time(&self, z: &[Complex64], out: &mut [f64]) -> (f64, f64) {
        let (m, n) = (self.m_steps, self.n_space);
        let mut w = transpose(z, m, n);
        par::for_each_chunk_mut(&mut w, m, |_, series| {
            self.inverse.apply_in_place(series).expect("length fixed at build");
            for (k, s) in series.iter_mut().enumerate() {
                *s /= self.gamma[k];
            }
        });
        let mut im2 = 0.0;
        for j in 0..n {
            for k in 0..m {
                let c = w[j * m + k];
                out[k * n + j] = c.re;
                im2 += c.im * c.im;
            }
        }
        (im2.sqrt(), crate::linalg::norm2(out))
    }

    fn shifted_solve(&self, j: usize, block: &mut [Complex64]) {
        match self.solvers[j].as_ref().expect("only solved frequencies are dispatched") {
            ShiftedSolver::Banded(lu) => lu.solve_in_place(block),
            ShiftedSolver::Spectral(inv) => {
                let basis = self.sine.as_ref().expect("spectral solvers need the sine basis");
                basis.transform(block);
                for (b, d) in block.iter_mut().zip(inv) {
                    *b *= d;
                }
                basis.transform(block);
            }
        }
    }

    /// `out = P_α⁻¹ v` for real `v`.
    pub fn apply_inverse_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let (m, n) = (self.m_steps, self.n_space);
        if v.len() != m * n {
            return Err(Error::DimensionMismatch { expected: m * n, found: v.len() });
        }
        if out.len() != m * n {
            return Err(Error::DimensionMismatch { expected: m * n, found: out.len() });
        }
        let mut z = self.to_frequency(v);
        par::for_each_chunk_mut(&mut z, n, |j, block| {
            if self.solvers[j].is_some() {
                self.shifted_solve(j, block);
            }
        });
        for j in 0..m {
            if self.solvers[j].is_none() {
                let partner = (m - j) % m;
                let (dst, src) = if j < partner {
                    let (lo, hi) = z.split_at_mut(partner * n);
                    (&mut lo[j * n..(j + 1) * n], &hi[..n])
                } else {
                    let (lo, hi) = z.split_at_mut(j * n);
                    (&mut hi[..n], &lo[partner * n..(partner + 1) * n])
                };
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = s.conj();
                }
            }
        }
        let (im, re) = self.frequency_to_time(&z, out);
        self.applications.fetch_add(1, AtomicOrdering::Relaxed);
        if im > IMAG_DISCARD_TOL * re {
            return Err(Error::ImaginaryResidue {
                ratio: if re > 0.0 { im / re } else { f64::INFINITY },
                tol: IMAG_DISCARD_TOL,
            });
        }
        Ok(())
    }

    pub fn apply_inverse(&self, v: &BlockVector) -> Result<BlockVector> {
        let mut out = BlockVector::zeros(v.m_blocks(), v.block_len());
        self.apply_inverse_into(v.as_slice(), out.as_mut_slice())?;
        Ok(out)
    }

    /// Steps (a) and (c) with the identity in between.
    pub fn diagonalization_roundtrip(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        let z = self.to_frequency(v);
        let mut out = vec![0.0; v.len()];
        self.frequency_to_time(&z, &mut out);
        Ok(out)
    }

    /// Matrix-free `P_α u`: block 0 is `Q₁u₀ − αQ₂u_{M−1}`, block `k` is
    /// `Q₁u_k − Q₂u_{k−1}`, with `Q₁,₂ = I ∓ ½d̄Ã`.
    pub fn apply_forward(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        let (m, n) = (self.m_steps, self.n_space);
        if u.len() != m * n || out.len() != m * n {
            return Err(Error::DimensionMismatch { expected: m * n, found: u.len().min(out.len()) });
        }
        let h = 0.5 * self.dbar;
        par::for_each_chunk_mut(out, n, |k, block| {
            let uk = &u[k * n..(k + 1) * n];
            let (prev, c) = if k == 0 { (&u[(m - 1) * n..], self.alpha) } else { (&u[(k - 1) * n..k * n], 1.0) };
            let diff: Vec<f64> = uk.iter().zip(prev).map(|(a, b)| a - c * b).collect();
            let sum: Vec<f64> = uk.iter().zip(prev).map(|(a, b)| a + c * b).collect();
            self.a_tilde.spmv_into(&sum, block).expect("dimension fixed at build");
            for (b, d) in block.iter_mut().zip(diff) {
                *b = d - h * *b;
            }
        });
        Ok(())
    }

    /// `‖P_α P_α⁻¹v − v‖₂ / ‖v‖₂`, zero for `v = 0`.
    pub fn residual_check_roundtrip(&self, v: &[f64]) -> Result<f64> {
        let nv = crate::linalg::norm2(v);
        if nv == 0.0 {
            return Ok(0.0);
        }
        let mut x = vec![0.0; v.len()];
        self.apply_inverse_into(v, &mut x)?;
        let mut y = vec![0.0; v.len()];
        self.apply_forward(&x, &mut y)?;
        let r: Vec<f64> = y.iter().zip(v).map(|(a, b)| a - b).collect();
        Ok(crate::linalg::norm2(&r) / nv)
    }

    /// Dense `P_α` for the oracles.
    pub fn to_dense(&self) -> DenseMatrix<f64> {
        let (m, n) = (self.m_steps, self.n_space);
        let a = self.a_tilde.to_dense();
        let h = 0.5 * self.dbar;
        let mut out = DenseMatrix::zeros(m * n, m * n);
        for k in 0..m {
            let (p, c) = if k == 0 { (m - 1, self.alpha) } else { (k - 1, 1.0) };
            for i in 0..n {
                for j in 0..n {
                    let id = if i == j { 1.0 } else { 0.0 };
                    out[(k * n + i, k * n + j)] += id - h * a[(i, j)];
                    out[(k * n + i, p * n + j)] += -c * (id + h * a[(i, j)]);
                }
            }
        }
        out
    }
}

/// One shifted solver per solved DFT frequency.
fn build_solvers(
    lambda1: &[Complex64],
    lambda2: &[Complex64],
    dbar: f64,
    a_tilde: &SparseMatrix,
    sine: Option<&SineBasis>,
    solved: &[bool],
    ordering: Ordering,
) -> Result<Vec<Option<ShiftedSolver>>> {
    let (m, n) = (lambda1.len(), a_tilde.nrows());
    let complex_a: Option<ComplexSparseMatrix> = sine.is_none().then(|| a_tilde.to_complex());
    let norm_a = a_tilde.norm_inf();
    par::try_map_range(m, |j| -> Result<Option<ShiftedSolver>> {
        if !solved[j] {
            return Ok(None);
        }
        let k = eig_index(j, m);
        let (l1, l2) = (lambda1[k], lambda2[k]);
        let singular = || Error::SingularPreconditioner { k: k + 1, lambda1: l1, lambda2: l2 };
        match (sine, &complex_a) {
            (Some(basis), _) => {
                let scale = l1.norm() + dbar * l2.norm() * norm_a;
                let mut inv = Vec::with_capacity(n);
                for &mu in &basis.eigenvalues {
                    let den = l1 - dbar * l2 * mu;
                    if den.norm() <= f64::EPSILON * scale {
                        return Err(singular());
                    }
                    inv.push(den.inv());
                }
                Ok(Some(ShiftedSolver::Spectral(inv)))
            }
            (None, Some(ca)) => {
                let shifted = ca.shifted(l1, -dbar * l2);
                match BandLu::factor(&shifted, ordering) {
                    Ok(lu) => Ok(Some(ShiftedSolver::Banded(lu))),
                    Err(Error::SingularMatrix { .. }) => Err(singular()),
                    Err(e) => Err(e),
                }
            }
            (None, None) => unreachable!("one solver backend is always prepared"),
        }
    })
}

/// `rows × cols` row-major to `cols × rows` row-major.
fn transpose(x: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
    par::for_each_chunk_mut(&mut out, rows, |c, dst| {
        for (r, d) in dst.iter_mut().enumerate() {
            *d = x[r * cols + c];
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_solve;

    #[test]
    fn eigenvalue_examples() {
        let (l1, l2) = eigenvalue_lists(0.01, 2);
        assert!((l1[0] - Complex64::new(0.9, 0.0)).norm() < 1e-15);
        assert!((l1[1] - Complex64::new(1.1, 0.0)).norm() < 1e-15);
        assert!((l2[0] - Complex64::new(0.55, 0.0)).norm() < 1e-15);
        assert!((l2[1] - Complex64::new(0.45, 0.0)).norm() < 1e-15);
        let (l1, l2) = eigenvalue_lists(1.0, 5);
        assert_eq!(l1[0], Complex64::new(0.0, 0.0));
        assert_eq!(l2[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn conjugate_pairing_is_exact() {
        for m in 1..20 {
            let (l1, l2) = eigenvalue_lists(0.37, m);
            for k in 1..m {
                assert_eq!(l1[m - k], l1[k].conj());
                assert_eq!(l2[m - k], l2[k].conj());
            }
        }
    }

    #[test]
    fn zero_operator_inverse_is_geometric() {
        let a = SparseMatrix::zeros(1, 1);
        let m = 6;
        let alpha = 0.5;
        let sys = AaoSystem::homogeneous(&a, 1.0, m, &[0.0]).unwrap();
        let p = AlphaPreconditioner::build(alpha, &sys).unwrap();
        let mut e = vec![0.0; m];
        e[0] = 1.0;
        let mut x = vec![0.0; m];
        p.apply_inverse_into(&e, &mut x).unwrap();
        for xi in x {
            assert!((xi - 1.0 / (1.0 - alpha)).abs() < 1e-13, "{xi}");
        }
    }

    #[test]
    fn matches_dense_and_full_mode() {
        let a = SparseMatrix::from_triplets(
            4,
            4,
            [
                (0, 0, -2.0),
                (0, 1, 1.0),
                (1, 0, 0.5),
                (1, 1, -3.0),
                (2, 2, -1.0),
                (2, 3, 0.3),
                (3, 3, -0.5),
                (3, 1, 0.2),
            ],
        )
        .unwrap();
        let m = 7;
        let sys = AaoSystem::homogeneous(&a, 1.0, m, &[1.0; 4]).unwrap();
        let v: Vec<f64> = (0..m * 4).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        for alpha in [0.5, 0.1, 1e-3] {
            let p = AlphaPreconditioner::build(alpha, &sys).unwrap();
            assert_eq!(p.factorizations(), (m + 2) / 2);
            let mut x = vec![0.0; v.len()];
            p.apply_inverse_into(&v, &mut x).unwrap();
            let y = dense_solve(&p.to_dense(), &v).unwrap();
            let err = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(err <= 1e-10 * crate::linalg::norm2(&y), "{alpha}: {err}");
            let full = AlphaPreconditioner::build_with(
                alpha,
                &sys,
                PrecondOptions { mode: SolveMode::Full, ..Default::default() },
            )
            .unwrap();
            let mut xf = vec![0.0; v.len()];
            full.apply_inverse_into(&v, &mut xf).unwrap();
            for (a, b) in x.iter().zip(&xf) {
                assert!((a - b).abs() <= 1e-14 * crate::linalg::norm2(&xf));
            }
            assert!(p.residual_check_roundtrip(&v).unwrap() < 1e-10);
        }
    }

    #[test]
    fn sine_path_matches_banded() {
        let a = SparseMatrix::tridiagonal(9, 100.0, -200.0, 100.0);
        let sys = AaoSystem::homogeneous(&a, 1.0, 8, &[0.0; 9]).unwrap();
        let v: Vec<f64> = (0..72).map(|i| (i as f64).cos()).collect();
        let fast = AlphaPreconditioner::build(0.1, &sys).unwrap();
        assert!(fast.uses_sine_transform());
        assert_eq!(fast.factorizations(), 0);
        let slow =
            AlphaPreconditioner::build_with(0.1, &sys, PrecondOptions { allow_spectral: false, ..Default::default() })
                .unwrap();
        let x = fast.apply_inverse(&BlockVector::from_vec(8, 9, v.clone()).unwrap()).unwrap();
        let y = slow.apply_inverse(&BlockVector::from_vec(8, 9, v).unwrap()).unwrap();
        for (a, b) in x.as_slice().iter().zip(y.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_circulant_is_reported() {
        let a = SparseMatrix::from_triplets(2, 2, [(0, 0, -1.0)]).unwrap();
        let sys = AaoSystem::homogeneous(&a, 1.0, 4, &[0.0; 2]).unwrap();
        match AlphaPreconditioner::build(1.0, &sys) {
            Err(Error::SingularPreconditioner { k, lambda1, lambda2 }) => {
                assert_eq!(k, 1);
                assert_eq!(lambda1, Complex64::new(0.0, 0.0));
                assert_eq!(lambda2, Complex64::new(1.0, 0.0));
            }
            other => panic!("expected a singular block, got {other:?}"),
        }
        assert!(AlphaPreconditioner::build(1e-3, &sys).is_ok());
    }
}
