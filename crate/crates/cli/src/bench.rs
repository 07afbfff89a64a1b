//! `cnpint bench`: wall time of the hot kernels on one thread and on the full pool.

use crate::config::RunConfig;
use crate::solve::build_system;
use cnpint_core::krylov::{gmres_right, GmresConfig};
use cnpint_core::precond::AlphaPreconditioner;
use serde::Serialize;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct BenchLine {
    pub kernel: &'static str,
    pub threads: usize,
    pub seconds: f64,
}

fn time(reps: usize, mut f: impl FnMut() -> anyhow::Result<()>) -> anyhow::Result<f64> {
    f()?;
    let start = Instant::now();
    for _ in 0..reps {
        f()?;
    }
    Ok(start.elapsed().as_secs_f64() / reps as f64)
}

/// Mean seconds per call of `apply`, `apply_inverse` and a GMRES solve.
pub fn run_bench(cfg: &RunConfig, reps: usize) -> anyhow::Result<Vec<BenchLine>> {
    let (_, sys) = build_system(cfg)?;
    let alpha = cfg.alpha.resolve(sys.tau(), sys.t_final());
    let pc = AlphaPreconditioner::build(alpha, &sys)?;
    let v: Vec<f64> = (0..sys.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
    let gcfg = GmresConfig { restart: cfg.restart, tol: cfg.tol, ..Default::default() };
    let mut lines = Vec::new();
    let full = rayon::current_num_threads();
    let mut counts = vec![1];
    if full > 1 {
        counts.push(full);
    }
    for threads in counts {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        pool.install(|| -> anyhow::Result<()> {
            let mut out = vec![0.0; sys.dim()];
            let t = time(reps, || Ok(sys.apply(&v, &mut out)?))?;
            lines.push(BenchLine { kernel: "apply_m", threads, seconds: t });
            let t = time(reps, || Ok(pc.apply_inverse_into(&v, &mut out)?))?;
            lines.push(BenchLine { kernel: "apply_inverse", threads, seconds: t });
            let t =
                time(
                    reps.div_ceil(10).max(1),
                    || Ok(gmres_right(&sys, &pc, sys.rhs().as_slice(), &gcfg).map(|_| ())?),
                )?;
            lines.push(BenchLine { kernel: "gmres", threads, seconds: t });
            Ok(())
        })?;
    }
    Ok(lines)
}
