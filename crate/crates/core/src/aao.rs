//! The all-at-once Crank–Nicolson system
//! `𝓜 = B₁ ⊗ I − (D̃B₂) ⊗ Ã`, its right-hand side, and the sequential
//! time-stepping solver used as the reference for every space-time solve.

use crate::error::{Error, Result};
use crate::linalg::{singular_values, BandLu, BlockVector, DenseMatrix, Ordering, SparseMatrix, DEFAULT_ORACLE_CAP};
use crate::par;
use crate::spatial::SpatialProblem;

/// Source term `f(x, t)`; `x` holds the coordinates of one unknown.
pub type Forcing<'a> = &'a (dyn Fn(&[f64], f64) -> f64 + Sync);

#[derive(Debug, Clone)]
pub struct AaoSystem {
    m_steps: usize,
    n_space: usize,
    tau: f64,
    t_final: f64,
    a_tilde: SparseMatrix,
    d_profile: Option<Vec<f64>>,
    rhs: BlockVector,
    u0: Vec<f64>,
}

/// First and second CN factors `Q₁ = I − ½Ã`, `Q₂ = I + ½Ã`.
#[derive(Debug, Clone)]
pub struct ToeplitzBlocks {
    pub q1: SparseMatrix,
    pub q2: SparseMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionBound {
    pub sigma_max_bound: f64,
    pub sigma_min_bound: f64,
    pub cond_bound: f64,
    pub norm_a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub bound: ConditionBound,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub cond: f64,
}

/// Arithmetic mean of a coefficient profile.
pub fn dbar(profile: &[f64]) -> Result<f64> {
    if profile.is_empty() {
        return Err(Error::InvalidParameter("empty coefficient profile".into()));
    }
    Ok(profile.iter().sum::<f64>() / profile.len() as f64)
}

/// Assembles the space-time system for `problem` on `[0, T]` with `M` steps.
pub fn assemble(
    problem: &SpatialProblem,
    t_final: f64,
    m_steps: usize,
    forcing: Option<Forcing<'_>>,
    u0: &[f64],
) -> Result<AaoSystem> {
    if m_steps == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    if !(t_final > 0.0) {
        return Err(Error::InvalidParameter(format!("final time {t_final} must be positive")));
    }
    let n = problem.n_unknowns();
    if u0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: u0.len() });
    }
    let tau = t_final / m_steps as f64;
    let half_times: Vec<f64> = (0..m_steps).map(|k| (k as f64 + 0.5) * tau).collect();
    let d_profile =
        (!problem.time_factor.is_constant()).then(|| half_times.iter().map(|&t| problem.time_factor.at(t)).collect());
    let points: Option<Vec<Vec<f64>>> = forcing.map(|_| (0..n).map(|k| problem.point(k)).collect());
    let source = |k: usize| -> Vec<f64> {
        let t = half_times[k];
        let dk = problem.time_factor.at(t);
        let mut g = vec![0.0; n];
        problem.boundary_source.add_to(t, tau * dk, &mut g);
        if let (Some(f), Some(pts)) = (forcing, &points) {
            for (gi, x) in g.iter_mut().zip(pts) {
                *gi += tau * f(x, t);
            }
        }
        g
    };
    let a_tilde = problem.matrix.scaled(tau);
    let mut rhs = BlockVector::zeros(m_steps, n);
    par::for_each_chunk_mut(rhs.as_mut_slice(), n, |k, block| block.copy_from_slice(&source(k)));
    let sys = AaoSystem { m_steps, n_space: n, tau, t_final, a_tilde, d_profile, rhs, u0: u0.to_vec() };
    let mut rhs = sys.rhs.clone();
    let q2u0 = sys.q2_apply(0, u0);
    for (r, q) in rhs.block_mut(0).iter_mut().zip(q2u0) {
        *r += q;
    }
    Ok(AaoSystem { rhs, ..sys })
}

impl AaoSystem {
    /// Builds a system directly from `Ã`, a time step and a right-hand side.
    pub fn from_parts(
        a_tilde: SparseMatrix,
        tau: f64,
        m_steps: usize,
        d_profile: Option<Vec<f64>>,
        rhs: BlockVector,
        u0: Vec<f64>,
    ) -> Result<Self> {
        let n = a_tilde.nrows();
        if a_tilde.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a_tilde.ncols() });
        }
        if m_steps == 0 || !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("bad time mesh M = {m_steps}, tau = {tau}")));
        }
        if rhs.m_blocks() != m_steps || rhs.block_len() != n {
            return Err(Error::DimensionMismatch { expected: m_steps * n, found: rhs.len() });
        }
        if u0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: u0.len() });
        }
        if let Some(d) = &d_profile {
            if d.len() != m_steps {
                return Err(Error::DimensionMismatch { expected: m_steps, found: d.len() });
            }
        }
        Ok(Self { m_steps, n_space: n, tau, t_final: tau * m_steps as f64, a_tilde, d_profile, rhs, u0 })
    }

    /// Homogeneous problem `u' = A u` from `u0`, rhs built accordingly.
    pub fn homogeneous(a: &SparseMatrix, t_final: f64, m_steps: usize, u0: &[f64]) -> Result<Self> {
        let n = a.nrows();
        if m_steps == 0 {
            return Err(Error::InvalidParameter("M must be at least 1".into()));
        }
        let tau = t_final / m_steps as f64;
        let rhs = BlockVector::zeros(m_steps, n);
        let mut sys = Self::from_parts(a.scaled(tau), tau, m_steps, None, rhs, u0.to_vec())?;
        sys.t_final = t_final;
        let q2u0 = sys.q2_apply(0, u0);
        sys.rhs.block_mut(0).copy_from_slice(&q2u0);
        Ok(sys)
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

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn a_tilde(&self) -> &SparseMatrix {
        &self.a_tilde
    }

    pub fn d_profile(&self) -> Option<&[f64]> {
        self.d_profile.as_deref()
    }

    /// `d(t_{k+½})`, 1 when no profile is present.
    pub fn d(&self, k: usize) -> f64 {
        self.d_profile.as_ref().map_or(1.0, |d| d[k])
    }

    /// Mean of the coefficient profile.
    pub fn dbar(&self) -> f64 {
        self.d_profile.as_deref().map_or(1.0, |d| dbar(d).expect("profile is nonempty"))
    }

    pub fn rhs(&self) -> &BlockVector {
        &self.rhs
    }

    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    pub fn with_rhs(mut self, rhs: BlockVector) -> Result<Self> {
        if rhs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rhs.len() });
        }
        self.rhs = rhs;
        Ok(self)
    }

    /// `Q₁`, `Q₂` scaled by `d`.
    pub fn toeplitz_blocks(&self, d: f64) -> ToeplitzBlocks {
        ToeplitzBlocks { q1: self.a_tilde.shifted(1.0, -0.5 * d), q2: self.a_tilde.shifted(1.0, 0.5 * d) }
    }

    fn q2_apply(&self, k: usize, x: &[f64]) -> Vec<f64> {
        let mut y = self.a_tilde.spmv(x).expect("dimension checked");
        let h = 0.5 * self.d(k);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi + h * *yi;
        }
        y
    }

    /// Matrix-free `𝓜 u`.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.n_space;
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        if out.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: out.len() });
        }
        par::for_each_chunk_mut(out, n, |k, block| {
            let uk = &u[k * n..(k + 1) * n];
            let h = 0.5 * self.d(k);
            if k == 0 {
                self.a_tilde.spmv_into(uk, block).expect("dimension checked");
                for (b, x) in block.iter_mut().zip(uk) {
                    *b = x - h * *b;
                }
            } else {
                let prev = &u[(k - 1) * n..k * n];
                let sum: Vec<f64> = uk.iter().zip(prev).map(|(a, b)| a + b).collect();
                self.a_tilde.spmv_into(&sum, block).expect("dimension checked");
                for ((b, x), p) in block.iter_mut().zip(uk).zip(prev) {
                    *b = x - p - h * *b;
                }
            }
        });
        Ok(())
    }

    pub fn apply_m(&self, u: &BlockVector) -> Result<BlockVector> {
        let mut out = BlockVector::zeros(self.m_steps, self.n_space);
        self.apply(u.as_slice(), out.as_mut_slice())?;
        Ok(out)
    }

    /// Dense `𝓜` for the oracles.
    pub fn to_dense(&self) -> DenseMatrix<f64> {
        let (m, n) = (self.m_steps, self.n_space);
        let a = self.a_tilde.to_dense();
        let mut out = DenseMatrix::zeros(m * n, m * n);
        for k in 0..m {
            let h = 0.5 * self.d(k);
            for i in 0..n {
                for j in 0..n {
                    let id = if i == j { 1.0 } else { 0.0 };
                    out[(k * n + i, k * n + j)] = id - h * a[(i, j)];
                    if k > 0 {
                        out[(k * n + i, (k - 1) * n + j)] = -(id + h * a[(i, j)]);
                    }
                }
            }
        }
        out
    }

    /// Marches `(I − ½d_kÃ)u^{k+1} = (I + ½d_kÃ)u^k + τf^{k+½}`, returning all
    /// `M` new levels as one block vector.
    pub fn solve_sequential(&self) -> Result<BlockVector> {
        let n = self.n_space;
        let mut u = BlockVector::zeros(self.m_steps, n);
        let stepper = StepSolver::new(self)?;
        for k in 0..self.m_steps {
            let mut b = self.rhs.block(k).to_vec();
            if k > 0 {
                let q2u = self.q2_apply(k, u.block(k - 1));
                for (bi, qi) in b.iter_mut().zip(q2u) {
                    *bi += qi;
                }
            }
            stepper.solve(k, &mut b)?;
            u.block_mut(k).copy_from_slice(&b);
        }
        Ok(u)
    }

    /// The final level `u^M` of [`Self::solve_sequential`].
    pub fn solve_sequential_final(&self) -> Result<Vec<f64>> {
        let stepper = StepSolver::new(self)?;
        let mut prev = self.u0.clone();
        for k in 0..self.m_steps {
            let mut b = self.rhs.block(k).to_vec();
            if k == 0 {
                stepper.solve(0, &mut b)?;
            } else {
                let q2u = self.q2_apply(k, &prev);
                for (bi, qi) in b.iter_mut().zip(q2u) {
                    *bi += qi;
                }
                stepper.solve(k, &mut b)?;
            }
            prev = b;
        }
        Ok(prev)
    }

    /// Bounds on the extreme singular values of `𝓜`.
    pub fn condition_bound(&self) -> ConditionBound {
        let d_max = self.d_profile.as_ref().map_or(1.0, |d| d.iter().fold(0.0f64, |a, &b| a.max(b.abs())));
        let norm_a = self.a_tilde.norm2_estimate(1e-6, 500) / self.tau * d_max;
        let m = self.m_steps as f64;
        ConditionBound {
            sigma_max_bound: 2.0 + self.tau * norm_a,
            sigma_min_bound: 1.0 / m,
            cond_bound: 2.0 * m + self.t_final * norm_a,
            norm_a,
        }
    }

    /// [`Self::condition_bound`] together with the true singular values.
    pub fn verify_condition_bound(&self) -> Result<ConditionCheck> {
        crate::linalg::dense::check_cap(self.dim(), DEFAULT_ORACLE_CAP)?;
        let bound = self.condition_bound();
        let sv = singular_values(&self.to_dense())?;
        let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
        let sigma_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(ConditionCheck { bound, sigma_max, sigma_min, cond: sigma_max / sigma_min })
    }
}

/// Per-step solves with `Q₁(d_k)`.
///
/// Constant profiles need one factorization. Varying profiles reuse the
/// factorization at `d̄` with iterative refinement, factorizing a step
/// exactly only if refinement stalls.
struct StepSolver<'a> {
    sys: &'a AaoSystem,
    base_d: f64,
    base: BandLu<f64>,
}

impl<'a> StepSolver<'a> {
    const REFINE_TOL: f64 = 1e-15;
    const REFINE_MAX: usize = 60;

    fn new(sys: &'a AaoSystem) -> Result<Self> {
        let base_d = sys.dbar();
        let base = BandLu::factor(&sys.toeplitz_blocks(base_d).q1, Ordering::Auto)?;
        Ok(Self { sys, base_d, base })
    }

    fn solve(&self, k: usize, b: &mut [f64]) -> Result<()> {
        let dk = self.sys.d(k);
        if dk == self.base_d {
            self.base.solve_in_place(b);
            return Ok(());
        }
        let rhs = b.to_vec();
        let bnorm = crate::linalg::norm2(&rhs);
        self.base.solve_in_place(b);
        let half = 0.5 * dk;
        for _ in 0..Self::REFINE_MAX {
            let ax = self.sys.a_tilde.spmv(b)?;
            let mut r: Vec<f64> = rhs.iter().zip(b.iter()).zip(&ax).map(|((f, x), a)| f - (x - half * a)).collect();
            if crate::linalg::norm2(&r) <= Self::REFINE_TOL * bnorm {
                return Ok(());
            }
            self.base.solve_in_place(&mut r);
            let step = crate::linalg::norm2(&r);
            for (x, c) in b.iter_mut().zip(&r) {
                *x += c;
            }
            if step <= Self::REFINE_TOL * crate::linalg::norm2(b) {
                return Ok(());
            }
        }
        let lu = BandLu::factor(&self.sys.toeplitz_blocks(dk).q1, Ordering::Auto)?;
        b.copy_from_slice(&rhs);
        lu.solve_in_place(b);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_solve;

    #[test]
    fn scalar_three_step_matrix() {
        let tau = 0.1;
        let a = SparseMatrix::from_triplets(1, 1, [(0, 0, -1.0)]).unwrap();
        let sys = AaoSystem::homogeneous(&a, 3.0 * tau, 3, &[1.0]).unwrap();
        let d = sys.to_dense();
        for k in 0..3 {
            assert!((d[(k, k)] - (1.0 + tau / 2.0)).abs() < 1e-15);
            if k > 0 {
                assert!((d[(k, k - 1)] + (1.0 - tau / 2.0)).abs() < 1e-15);
            }
        }
        assert_eq!(d[(2, 0)], 0.0);
    }

    #[test]
    fn zero_operator_accumulates_forcing() {
        let a = SparseMatrix::zeros(2, 2);
        let tau = 0.25;
        let m = 4;
        let mut rhs = BlockVector::zeros(m, 2);
        for k in 0..m {
            rhs.block_mut(k).copy_from_slice(&[tau * 3.0, -tau]);
        }
        let u0 = [1.0, 2.0];
        for (r, u) in rhs.block_mut(0).iter_mut().zip(u0) {
            *r += u;
        }
        let sys = AaoSystem::from_parts(a, tau, m, None, rhs, u0.to_vec()).unwrap();
        let u = sys.solve_sequential().unwrap();
        for k in 0..m {
            let t = (k + 1) as f64 * tau;
            assert!((u.block(k)[0] - (1.0 + 3.0 * t)).abs() < 1e-14);
            assert!((u.block(k)[1] - (2.0 - t)).abs() < 1e-14);
        }
    }

    #[test]
    fn sequential_matches_dense_with_profile() {
        let a = SparseMatrix::tridiagonal(5, 1.0, -2.0, 1.0).scaled(10.0);
        let tau = 0.05;
        let m = 6;
        let d: Vec<f64> = (0..m).map(|k| (-0.3 * (k as f64 + 0.5) * tau).exp()).collect();
        let rhs = BlockVector::from_vec(m, 5, (0..30).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let sys = AaoSystem::from_parts(a.scaled(tau), tau, m, Some(d), rhs, vec![0.0; 5]).unwrap();
        let u = sys.solve_sequential().unwrap();
        let x = dense_solve(&sys.to_dense(), sys.rhs().as_slice()).unwrap();
        let err: f64 = u.as_slice().iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
        let mu = sys.apply_m(&u).unwrap();
        for (a, b) in mu.as_slice().iter().zip(sys.rhs().as_slice()) {
            assert!((a - b).abs() < 1e-13);
        }
        assert_eq!(sys.solve_sequential_final().unwrap(), u.last_block().to_vec());
    }

    #[test]
    fn dbar_values() {
        assert_eq!(dbar(&[2.0, 2.0, 2.0]).unwrap(), 2.0);
        assert!(dbar(&[]).is_err());
        let expect = ((-0.015f64).exp() + (-0.045f64).exp()) / 2.0;
        assert!((dbar(&[(-0.015f64).exp(), (-0.045f64).exp()]).unwrap() - expect).abs() < 1e-16);
    }

    #[test]
    fn zero_operator_condition() {
        let a = SparseMatrix::zeros(1, 1);
        let sys = AaoSystem::homogeneous(&a, 1.0, 2, &[1.0]).unwrap();
        let c = sys.verify_condition_bound().unwrap();
        assert_eq!(c.bound.cond_bound, 4.0);
        let expect = ((3.0 + 5f64.sqrt()) / (3.0 - 5f64.sqrt())).sqrt();
        assert!((c.cond - expect).abs() < 1e-12);
    }
}
