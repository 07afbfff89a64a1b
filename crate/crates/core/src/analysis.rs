//! Spectral checks on small instances: the CN step matrix `Q₁⁻¹Q₂`,
//! `J_M = (Q₁⁻¹Q₂)^M`, the spectrum of `P_α⁻¹𝓜` with its annulus
//! classification, eigenvector conditioning and `‖𝓜⁻¹𝓡‖₂`.

use crate::aao::AaoSystem;
use crate::error::{Error, Result};
use crate::linalg::dense::check_cap;
use crate::linalg::{
    dense_eig, dense_eig_capped, singular_values, singular_values_complex, Definiteness, DenseLu, DenseMatrix,
    DEFAULT_ORACLE_CAP,
};
use crate::par;
use crate::precond::AlphaPreconditioner;
use num_complex::Complex64;

pub const DEFAULT_TOL_UNIT: f64 = 1e-8;
pub const ANNULUS_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    /// Eigenvalues of the densified preconditioned matrix.
    Dense,
    /// `(M − 1)N` unit eigenvalues plus those of `(I − αJ_M)⁻¹`.
    Structured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    pub n_unit: usize,
    pub n_annulus: usize,
    pub violations: Vec<(Complex64, String)>,
    pub alpha: f64,
    pub tol_unit: f64,
    pub method: SpectrumMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenClass {
    Unit,
    Annulus,
    Outside,
}

/// Classifies `z` against `{|z − 1| ≤ tol}` and
/// `Ω_α = {1/(1+α) ≤ |z| ≤ 1/(1−α), Re z > 0}`.
pub fn classify(z: Complex64, alpha: f64, tol_unit: f64) -> (EigenClass, Option<String>) {
    if (z - 1.0).norm() <= tol_unit {
        return (EigenClass::Unit, None);
    }
    let lo = 1.0 / (1.0 + alpha) - ANNULUS_SLACK;
    let hi = if alpha < 1.0 { 1.0 / (1.0 - alpha) + ANNULUS_SLACK } else { f64::INFINITY };
    let r = z.norm();
    if !(z.re > 0.0) {
        (EigenClass::Outside, Some(format!("Re = {:.3e} is not positive", z.re)))
    } else if r < lo {
        (EigenClass::Outside, Some(format!("|z| = {r:.12} below {lo:.12}")))
    } else if r > hi {
        (EigenClass::Outside, Some(format!("|z| = {r:.12} above {hi:.12}")))
    } else {
        (EigenClass::Annulus, None)
    }
}

impl SpectrumReport {
    fn from_eigenvalues(eigenvalues: Vec<Complex64>, alpha: f64, tol_unit: f64, method: SpectrumMethod) -> Self {
        let (mut n_unit, mut n_annulus, mut violations) = (0, 0, Vec::new());
        for &z in &eigenvalues {
            match classify(z, alpha, tol_unit) {
                (EigenClass::Unit, _) => n_unit += 1,
                (EigenClass::Annulus, _) => n_annulus += 1,
                (EigenClass::Outside, reason) => violations.push((z, reason.unwrap_or_default())),
            }
        }
        Self { eigenvalues, n_unit, n_annulus, violations, alpha, tol_unit, method }
    }

    pub fn non_unit(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().copied().filter(|z| (z - 1.0).norm() > self.tol_unit).collect()
    }
}

fn check_space(sys: &AaoSystem) -> Result<()> {
    check_cap(sys.n_space(), DEFAULT_ORACLE_CAP)
}

fn require_constant(sys: &AaoSystem) -> Result<()> {
    match sys.d_profile() {
        Some(d) if d.iter().any(|&x| x != d[0]) => {
            Err(Error::InvalidParameter("the step-matrix analysis needs a time-constant operator".into()))
        }
        _ => Ok(()),
    }
}

/// Dense `Q₁⁻¹Q₂` with `Q₁,₂ = I ∓ ½d̄Ã`.
pub fn step_matrix(sys: &AaoSystem) -> Result<DenseMatrix<f64>> {
    check_space(sys)?;
    let blocks = sys.toeplitz_blocks(sys.dbar());
    let lu = DenseLu::factor(&blocks.q1.to_dense())?;
    Ok(lu.solve_matrix(&blocks.q2.to_dense()))
}

/// `J_M = (Q₁⁻¹Q₂)^M` by repeated squaring.
pub fn j_m(sys: &AaoSystem) -> Result<DenseMatrix<f64>> {
    let t = step_matrix(sys)?;
    let mut result = DenseMatrix::identity(t.nrows());
    let mut base = t;
    let mut e = sys.m_steps();
    while e > 0 {
        if e & 1 == 1 {
            result = result.matmul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.matmul(&base);
        }
    }
    Ok(result)
}

/// Eigenvalues of `Q₁⁻¹Q₂`.
pub fn step_matrix_spectrum(sys: &AaoSystem) -> Result<Vec<Complex64>> {
    require_constant(sys)?;
    Ok(dense_eig(&step_matrix(sys)?, false)?.values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JmBounds {
    pub re_min: f64,
    pub re_max: f64,
    pub mod_min: f64,
    pub mod_max: f64,
}

fn extremes(values: &[Complex64]) -> JmBounds {
    let mut b = JmBounds {
        re_min: f64::INFINITY,
        re_max: f64::NEG_INFINITY,
        mod_min: f64::INFINITY,
        mod_max: f64::NEG_INFINITY,
    };
    for z in values {
        b.re_min = b.re_min.min(z.re);
        b.re_max = b.re_max.max(z.re);
        b.mod_min = b.mod_min.min(z.norm());
        b.mod_max = b.mod_max.max(z.norm());
    }
    b
}

/// Eigenvalues of `I − αJ_M`.
pub fn jm_spectrum(sys: &AaoSystem, alpha: f64) -> Result<Vec<Complex64>> {
    require_constant(sys)?;
    let j = j_m(sys)?;
    let n = j.nrows();
    let shifted = DenseMatrix::identity(n).sub(&j.scale(alpha));
    Ok(dense_eig(&shifted, false)?.values)
}

/// Extremes of the spectrum of `I − αJ_M`.
pub fn jm_spectrum_bounds(sys: &AaoSystem, alpha: f64) -> Result<JmBounds> {
    Ok(extremes(&jm_spectrum(sys, alpha)?))
}

/// Dense `P_α⁻¹𝓜`, one preconditioner application per column of `𝓜`.
pub fn preconditioned_matrix(sys: &AaoSystem, pc: &AlphaPreconditioner) -> Result<DenseMatrix<f64>> {
    let dim = sys.dim();
    check_cap(dim, DEFAULT_ORACLE_CAP)?;
    let cols = par::try_map_range(dim, |c| -> Result<Vec<f64>> {
        let mut e = vec![0.0; dim];
        e[c] = 1.0;
        let mut me = vec![0.0; dim];
        sys.apply(&e, &mut me)?;
        let mut out = vec![0.0; dim];
        pc.apply_inverse_into(&me, &mut out)?;
        Ok(out)
    })?;
    Ok(DenseMatrix::from_columns(dim, &cols))
}

/// Spectrum of `P_α⁻¹𝓜` with default tolerances.
pub fn preconditioned_spectrum(sys: &AaoSystem, alpha: f64) -> Result<SpectrumReport> {
    preconditioned_spectrum_with(sys, alpha, DEFAULT_TOL_UNIT, DEFAULT_ORACLE_CAP)
}

/// Spectrum of `P_α⁻¹𝓜`. Instances with `MN ≤ cap` are densified through
/// the production apply path; larger constant-coefficient instances use the
/// block structure `P_α⁻¹𝓜 = I + α[0 | P_α⁻¹𝓡]`.
pub fn preconditioned_spectrum_with(sys: &AaoSystem, alpha: f64, tol_unit: f64, cap: usize) -> Result<SpectrumReport> {
    if sys.dim() <= cap {
        let pc = AlphaPreconditioner::build(alpha, sys)?;
        let dense = preconditioned_matrix(sys, &pc)?;
        let values = dense_eig_capped(&dense, false, cap)?.values;
        return Ok(SpectrumReport::from_eigenvalues(values, alpha, tol_unit, SpectrumMethod::Dense));
    }
    if sys.d_profile().is_some_and(|d| d.iter().any(|&x| x != d[0])) {
        return Err(Error::OracleCap { size: sys.dim(), cap });
    }
    let n = sys.n_space();
    check_cap(n, cap)?;
    let j = j_m(sys)?;
    let shifted = DenseMatrix::identity(n).sub(&j.scale(alpha));
    let inner = {
        let e = dense_eig(&shifted, false)?;
        e.values
    };
    let mut values = Vec::with_capacity(sys.dim());
    for z in inner {
        if z.norm() <= f64::EPSILON * n as f64 {
            let (l1, l2) = crate::precond::eigenvalue_lists(alpha, sys.m_steps());
            return Err(Error::SingularPreconditioner { k: 1, lambda1: l1[0], lambda2: l2[0] });
        }
        values.push(z.inv());
    }
    values.extend(std::iter::repeat_n(Complex64::new(1.0, 0.0), (sys.m_steps() - 1) * n));
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(SpectrumReport::from_eigenvalues(values, alpha, tol_unit, SpectrumMethod::Structured))
}

/// Eigenvalues of `𝓜`: `𝓜` is block lower-triangular with diagonal blocks
/// `I − ½d_kÃ`.
pub fn system_spectrum(sys: &AaoSystem) -> Result<Vec<Complex64>> {
    check_space(sys)?;
    let a = dense_eig(&sys.a_tilde().to_dense(), false)?.values;
    let mut out = Vec::with_capacity(sys.dim());
    for k in 0..sys.m_steps() {
        let h = 0.5 * sys.d(k);
        out.extend(a.iter().map(|z| Complex64::new(1.0, 0.0) - h * z));
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalizabilityProbe {
    /// 2-norm condition number of the unit-column eigenvector matrix.
    pub eigvec_condition: f64,
    /// `max_k ‖P_α⁻¹𝓜 s_k − λ_k s_k‖₂` over the assembled eigenvectors.
    pub residual: f64,
}

/// Condition number of an eigenvector basis of `P_α⁻¹𝓜`.
///
/// With `C = P_α⁻¹𝓡 = [C_1; …; C_M]` (only the last block column of `𝓡`
/// is nonzero), `P_α⁻¹𝓜 = I + α[0 | C]`. Unit vectors in blocks `1..M−1`
/// are eigenvectors for 1, and each eigenpair `C_M v = μv` gives the
/// eigenvalue `Λ = 1 + αμ` with eigenvector `[αC_1v/(Λ−1); …; v]`.
pub fn diagonalizability_probe(sys: &AaoSystem, alpha: f64) -> Result<DiagonalizabilityProbe> {
    require_constant(sys)?;
    let (m, n) = (sys.m_steps(), sys.n_space());
    let dim = m * n;
    check_cap(dim, DEFAULT_ORACLE_CAP)?;
    let pc = AlphaPreconditioner::build(alpha, sys)?;
    let q2 = sys.toeplitz_blocks(sys.dbar()).q2.to_dense();
    // columns of C
    let c_cols = par::try_map_range(n, |j| -> Result<Vec<f64>> {
        let mut col = vec![0.0; dim];
        for i in 0..n {
            col[i] = q2[(i, j)];
        }
        let mut out = vec![0.0; dim];
        pc.apply_inverse_into(&col, &mut out)?;
        Ok(out)
    })?;
    let c_last = DenseMatrix::from_fn(n, n, |i, j| c_cols[j][(m - 1) * n + i]);
    let eig = dense_eig(&c_last, true)?;
    let vecs = eig.vectors.expect("eigenvectors requested");
    let mut s = DenseMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..(m - 1) * n {
        s[(i, i)] = Complex64::new(1.0, 0.0);
    }
    let mut residual: f64 = 0.0;
    for (q, &mu) in eig.values.iter().enumerate() {
        let v: Vec<Complex64> = vecs.column(q);
        let lambda = 1.0 + alpha * mu;
        // x = C v over all blocks
        let cv: Vec<Complex64> = (0..dim).map(|r| (0..n).map(|j| c_cols[j][r] * v[j]).sum::<Complex64>()).collect();
        // [αC₁v; …; (Λ−1)v] avoids dividing by Λ − 1; a zero tail with a
        // nonzero head means a Jordan block and shows up as a singular basis
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        let denom = lambda - 1.0;
        for r in 0..(m - 1) * n {
            col[r] = alpha * cv[r];
        }
        for (c, x) in col[(m - 1) * n..].iter_mut().zip(&v) {
            *c = denom * x;
        }
        if crate::linalg::norm2(&col) == 0.0 {
            col[(m - 1) * n..].copy_from_slice(&v);
        }
        let nrm = crate::linalg::norm2(&col);
        for c in &mut col {
            *c /= nrm;
        }
        // residual of (I + α[0|C]) x − Λ x using the block structure
        let tail = &col[(m - 1) * n..];
        let ct: Vec<Complex64> = (0..dim).map(|r| (0..n).map(|j| c_cols[j][r] * tail[j]).sum::<Complex64>()).collect();
        let res: Vec<Complex64> = (0..dim).map(|r| col[r] + alpha * ct[r] - lambda * col[r]).collect();
        residual = residual.max(crate::linalg::norm2(&res));
        for r in 0..dim {
            s[(r, (m - 1) * n + q)] = col[r];
        }
    }
    let sv = singular_values_complex(&s)?;
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    Ok(DiagonalizabilityProbe { eigvec_condition: if smin > 0.0 { smax / smin } else { f64::INFINITY }, residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrNormCheck {
    pub norm_minv_r: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `‖𝓜⁻¹𝓡‖₂ ≤ √M`, where `𝓡` holds `Q₂` in its top-right block.
/// Only the last block column of `𝓜⁻¹𝓡` is nonzero, with blocks
/// `(Q₁⁻¹Q₂)^n`, `n = 1..M`.
pub fn mr_norm_bound_check(sys: &AaoSystem) -> Result<MrNormCheck> {
    if sys.a_tilde().flags().definiteness != Definiteness::NegativeSemidefinite || !sys.a_tilde().flags().symmetric {
        return Err(Error::InvalidParameter("the bound needs a symmetric negative semidefinite operator".into()));
    }
    require_constant(sys)?;
    let (m, n) = (sys.m_steps(), sys.n_space());
    check_cap(m * n, DEFAULT_ORACLE_CAP)?;
    let t = step_matrix(sys)?;
    let mut g = t.clone();
    let mut stacked = DenseMatrix::zeros(m * n, n);
    for blk in 0..m {
        for i in 0..n {
            for j in 0..n {
                stacked[(blk * n + i, j)] = g[(i, j)];
            }
        }
        if blk + 1 < m {
            g = t.matmul(&g);
        }
    }
    let norm = singular_values(&stacked)?.first().copied().unwrap_or(0.0);
    let bound = (m as f64).sqrt();
    Ok(MrNormCheck { norm_minv_r: norm, bound, holds: norm <= bound + 1e-8 })
}
