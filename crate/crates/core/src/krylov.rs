//! Restarted GMRES with right (or, for analysis, left) preconditioning.

use crate::aao::AaoSystem;
use crate::error::{Error, Result};
use crate::par;
use crate::precond::AlphaPreconditioner;

/// `y = A x` for a square operator.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

/// `y = P⁻¹ x`.
pub trait Preconditioner: Sync {
    fn dim(&self) -> usize;
    fn apply_inverse(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

impl LinearOperator for AaoSystem {
    fn dim(&self) -> usize {
        AaoSystem::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        AaoSystem::apply(self, x, y)
    }
}

impl Preconditioner for AlphaPreconditioner {
    fn dim(&self) -> usize {
        AlphaPreconditioner::dim(self)
    }

    fn apply_inverse(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.apply_inverse_into(x, y)
    }
}

/// The identity preconditioner.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl Preconditioner for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply_inverse(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        y.copy_from_slice(x);
        Ok(())
    }
}

impl LinearOperator for crate::linalg::SparseMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.spmv_into(x, y)
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64]) -> Result<()> + Sync> FnOperator<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[f64], &mut [f64]) -> Result<()> + Sync> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        (self.f)(x, y)
    }
}

impl<F: Fn(&[f64], &mut [f64]) -> Result<()> + Sync> Preconditioner for FnOperator<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_inverse(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        (self.f)(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub restart: usize,
    /// Relative residual `‖b − Au‖/‖b‖` at which to stop.
    pub tol: f64,
    pub max_total_iters: usize,
    pub record_history: bool,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self { restart: 40, tol: 1e-9, max_total_iters: 2000, record_history: true }
    }
}

impl GmresConfig {
    fn validate(&self) -> Result<()> {
        if self.restart == 0 || !(self.tol > 0.0 && self.tol < 1.0) || self.max_total_iters == 0 {
            return Err(Error::InvalidParameter(format!("invalid GMRES configuration {self:?}")));
        }
        Ok(())
    }

    /// Unrestarted GMRES up to `max_total_iters` iterations.
    pub fn full(tol: f64, max_total_iters: usize) -> Self {
        Self { restart: max_total_iters, tol, max_total_iters, record_history: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmresStatus {
    Converged,
    /// The Krylov space became invariant; the iterate is exact up to round-off.
    HappyBreakdown,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondSide {
    Right,
    Left,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresReport {
    pub iterations: usize,
    pub converged: bool,
    pub status: GmresStatus,
    /// Residual norms, starting with `‖r₀‖`. The last entry of every cycle is
    /// the true residual; left-preconditioned runs record `‖P⁻¹r‖`.
    pub residual_history: Vec<f64>,
    pub final_relres: f64,
    pub restart: usize,
    pub tol: f64,
    pub side: PrecondSide,
}

impl GmresReport {
    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NoConvergence)
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    par::sum_range(a.len(), |i| a[i] * b[i])
}

fn norm(a: &[f64]) -> f64 {
    crate::linalg::norm2(a)
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    par::for_each_chunk_mut(y, 8192, |c, chunk| {
        let off = c * 8192;
        for (i, yi) in chunk.iter_mut().enumerate() {
            *yi += alpha * x[off + i];
        }
    });
}

/// `(c, s, r)` with `[c s; −s c]·[a; b] = [r; 0]`.
fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        (1.0, 0.0, a)
    } else {
        let r = a.hypot(b);
        (a / r, b / r, r)
    }
}

const REORTH_TRIGGER: f64 = 1e-8;

/// GMRES on `A M⁻¹ y = b` with `x = M⁻¹ y`; passes `None` for no preconditioner.
fn gmres_core(
    op: &dyn LinearOperator,
    right: Option<&dyn Preconditioner>,
    b: &[f64],
    cfg: &GmresConfig,
    side: PrecondSide,
) -> Result<(Vec<f64>, GmresReport)> {
    cfg.validate()?;
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if let Some(p) = right {
        if p.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
        }
    }
    let precondition = |x: &[f64], y: &mut [f64]| -> Result<()> {
        match right {
            Some(p) => p.apply_inverse(x, y),
            None => {
                y.copy_from_slice(x);
                Ok(())
            }
        }
    };

    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    let mut history = vec![bnorm];
    let report = |iterations, status, history: Vec<f64>| {
        let last = *history.last().expect("history starts with the initial norm");
        GmresReport {
            iterations,
            converged: status != GmresStatus::MaxIterations,
            status,
            final_relres: if bnorm > 0.0 { last / bnorm } else { 0.0 },
            residual_history: if cfg.record_history { history } else { vec![history[0], last] },
            restart: cfg.restart,
            tol: cfg.tol,
            side,
        }
    };
    if bnorm == 0.0 {
        return Ok((x, report(0, GmresStatus::Converged, history)));
    }
    let target = cfg.tol * bnorm;
    let mut r = b.to_vec();
    let mut beta = bnorm;
    let mut total = 0usize;
    let m = cfg.restart;
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];

    loop {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        let mut breakdown = false;

        for j in 0..m {
            precondition(&basis[j], &mut z)?;
            op.apply(&z, &mut w)?;
            let wnorm0 = norm(&w);
            for i in 0..=j {
                let hij = dot(&w, &basis[i]);
                h[i][j] = hij;
                axpy(-hij, &basis[i], &mut w);
            }
            let mut wnorm = norm(&w);
            if wnorm > 0.0 {
                let loss = (0..=j).map(|i| dot(&w, &basis[i]).abs()).fold(0.0, f64::max) / wnorm;
                if loss > REORTH_TRIGGER {
                    for i in 0..=j {
                        let c = dot(&w, &basis[i]);
                        h[i][j] += c;
                        axpy(-c, &basis[i], &mut w);
                    }
                    wnorm = norm(&w);
                }
            }
            h[j + 1][j] = wnorm;
            for i in 0..j {
                let (a, bb) = (h[i][j], h[i + 1][j]);
                h[i][j] = cs[i] * a + sn[i] * bb;
                h[i + 1][j] = -sn[i] * a + cs[i] * bb;
            }
            let (c, s, rr) = givens(h[j][j], h[j + 1][j]);
            cs[j] = c;
            sn[j] = s;
            h[j][j] = rr;
            h[j + 1][j] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            total += 1;
            k_used = j + 1;
            history.push(g[j + 1].abs());
            if wnorm <= 1e-14 * wnorm0.max(f64::MIN_POSITIVE) {
                breakdown = true;
                break;
            }
            if g[j + 1].abs() <= target || total >= cfg.max_total_iters {
                break;
            }
            basis.push(w.iter().map(|v| v / wnorm).collect());
        }

        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|l| h[i][l] * y[l]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut comb = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            axpy(*yi, v, &mut comb);
        }
        precondition(&comb, &mut z)?;
        axpy(1.0, &z, &mut x);

        op.apply(&x, &mut w)?;
        for ((ri, bi), wi) in r.iter_mut().zip(b).zip(&w) {
            *ri = bi - wi;
        }
        beta = norm(&r);
        *history.last_mut().expect("nonempty") = beta;

        if beta <= target {
            let status = if breakdown { GmresStatus::HappyBreakdown } else { GmresStatus::Converged };
            return Ok((x, report(total, status, history)));
        }
        if breakdown && beta == 0.0 {
            return Ok((x, report(total, GmresStatus::HappyBreakdown, history)));
        }
        if total >= cfg.max_total_iters {
            return Ok((x, report(total, GmresStatus::MaxIterations, history)));
        }
    }
}

/// Right-preconditioned GMRES from a zero initial guess.
pub fn gmres_right(
    op: &dyn LinearOperator,
    precond: &dyn Preconditioner,
    b: &[f64],
    cfg: &GmresConfig,
) -> Result<(Vec<f64>, GmresReport)> {
    gmres_core(op, Some(precond), b, cfg, PrecondSide::Right)
}

/// Unpreconditioned GMRES.
pub fn gmres(op: &dyn LinearOperator, b: &[f64], cfg: &GmresConfig) -> Result<(Vec<f64>, GmresReport)> {
    gmres_core(op, None, b, cfg, PrecondSide::Right)
}

/// Left-preconditioned GMRES on `P⁻¹A x = P⁻¹b`; residuals are preconditioned.
pub fn gmres_left(
    op: &dyn LinearOperator,
    precond: &dyn Preconditioner,
    b: &[f64],
    cfg: &GmresConfig,
) -> Result<(Vec<f64>, GmresReport)> {
    let n = op.dim();
    let mut pb = vec![0.0; n];
    precond.apply_inverse(b, &mut pb)?;
    let composite = FnOperator::new(n, |x: &[f64], y: &mut [f64]| {
        let mut t = vec![0.0; x.len()];
        op.apply(x, &mut t)?;
        precond.apply_inverse(&t, y)
    });
    gmres_core(&composite, None, &pb, cfg, PrecondSide::Left)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBoundCheck {
    pub holds: bool,
    /// `δ = α√(T/τ)`
    pub delta: f64,
    /// `2√δ(1 − δ)`
    pub bound_rate: f64,
    /// Largest `(‖r_k‖/‖r₀‖)^{1/k}` seen in the history.
    pub worst_rate: f64,
    /// Set for right-preconditioned histories, to which the bound does not strictly apply.
    pub advisory: bool,
}

/// Compares `‖r_k‖/‖r₀‖` against `[2√δ(1−δ)]^k`.
pub fn rate_bound_check(report: &GmresReport, alpha: f64, tau: f64, t_final: f64) -> Result<RateBoundCheck> {
    let delta = alpha * (t_final / tau).sqrt();
    if !(delta < 0.5) || !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, 1/2)")));
    }
    let bound_rate = 2.0 * delta.sqrt() * (1.0 - delta);
    let hist = &report.residual_history;
    let r0 = hist.first().copied().unwrap_or(0.0);
    let mut holds = true;
    let mut worst_rate: f64 = 0.0;
    if r0 > 0.0 {
        for (k, &rk) in hist.iter().enumerate().skip(1) {
            let ratio = rk / r0;
            worst_rate = worst_rate.max(ratio.powf(1.0 / k as f64));
            if ratio > bound_rate.powi(k as i32) * (1.0 + 1e-12) {
                holds = false;
            }
        }
    }
    Ok(RateBoundCheck { holds, delta, bound_rate, worst_rate, advisory: report.side == PrecondSide::Right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrix;

    #[test]
    fn identity_in_one_step() {
        let a = SparseMatrix::identity(5);
        let b = [1.0, -2.0, 3.0, 0.5, 4.0];
        let (x, rep) = gmres_right(&a, &Identity(5), &b, &GmresConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        for (xi, bi) in x.iter().zip(b) {
            assert!((xi - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_preconditioner_in_one_step() {
        let a = SparseMatrix::tridiagonal(6, -1.0, 3.0, -1.5);
        let lu = crate::linalg::DenseLu::factor(&a.to_dense()).unwrap();
        let p = FnOperator::new(6, |x: &[f64], y: &mut [f64]| {
            y.copy_from_slice(x);
            lu.solve_in_place(y);
            Ok(())
        });
        let b = [1.0, 0.0, 2.0, -1.0, 0.0, 3.0];
        let (_, rep) = gmres_right(&a, &p, &b, &GmresConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn restarted_history_monotone_within_cycles() {
        let a = SparseMatrix::tridiagonal(60, -1.0, 2.2, -0.8);
        let b: Vec<f64> = (0..60).map(|i| (i as f64 * 0.3).sin()).collect();
        let cfg = GmresConfig { restart: 5, ..Default::default() };
        let (x, rep) = gmres(&a, &b, &cfg).unwrap();
        assert!(rep.converged);
        for cycle in rep.residual_history.chunks(cfg.restart + 1) {
            for w in cycle.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-10));
            }
        }
        let r = a.spmv(&x).unwrap();
        let err: f64 = r.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
        assert!(err <= 1e-9 * crate::linalg::norm2(&b));
    }

    #[test]
    fn max_iterations_reported() {
        let a = SparseMatrix::tridiagonal(50, -1.0, 2.0, -1.0);
        let b = vec![1.0; 50];
        let cfg = GmresConfig { restart: 2, max_total_iters: 6, ..Default::default() };
        let (_, rep) = gmres(&a, &b, &cfg).unwrap();
        assert_eq!(rep.status, GmresStatus::MaxIterations);
        assert_eq!(rep.iterations, 6);
        assert!(matches!(rep.ensure_converged(), Err(Error::NoConvergence)));
    }

    #[test]
    fn rate_formula() {
        let rep = GmresReport {
            iterations: 0,
            converged: true,
            status: GmresStatus::Converged,
            residual_history: vec![1.0],
            final_relres: 1.0,
            restart: 40,
            tol: 1e-9,
            side: PrecondSide::Left,
        };
        let c = rate_bound_check(&rep, 0.25, 1.0, 1.0).unwrap();
        assert!((c.bound_rate - 0.75).abs() < 1e-15);
        assert!(rate_bound_check(&rep, 0.5, 1.0, 1.0).is_err());
        let tiny = rate_bound_check(&rep, 1e-12, 1.0, 1.0).unwrap();
        assert!(tiny.bound_rate < 1e-5);
    }
}
