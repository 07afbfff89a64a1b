//! One table row per run: assemble, precondition, solve, price.

use crate::config::{PrecondKind, RunConfig};
use cnpint_core::aao::{assemble, AaoSystem};
use cnpint_core::krylov::{gmres, gmres_right, GmresConfig, GmresReport};
use cnpint_core::precond::AlphaPreconditioner;
use cnpint_core::pricing::{price_at, reference_price, relative_error, PriceQuery, ReferenceCache};
use cnpint_core::spatial::Grid2D;
use cnpint_core::Error;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

/// Fixed column order of every table CSV.
pub const TABLE_COLUMNS: [&str; 10] =
    ["preset", "grid", "N_t", "DoFs", "preconditioner", "alpha", "Its", "Err", "wall_time", "status"];

/// Marker written in place of `Its` and `Err` when the preconditioner is singular.
pub const SINGULAR_MARK: &str = "‡";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Converged,
    NotConverged,
    Singular,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Converged => "converged",
            RowStatus::NotConverged => "max-iterations",
            RowStatus::Singular => "singular-preconditioner",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub preset: String,
    pub grid: String,
    pub n_t: usize,
    pub dofs: usize,
    pub preconditioner: String,
    pub alpha: f64,
    pub its: Option<usize>,
    pub price: Option<f64>,
    pub reference: Option<f64>,
    pub err: Option<f64>,
    pub wall_time: f64,
    pub status: RowStatus,
}

impl TableRow {
    pub fn csv_record(&self) -> [String; 10] {
        let singular = self.status == RowStatus::Singular;
        let its = match (singular, self.its) {
            (true, _) => SINGULAR_MARK.to_string(),
            (false, Some(k)) => k.to_string(),
            (false, None) => String::new(),
        };
        let err = match (singular, self.err) {
            (true, _) => SINGULAR_MARK.to_string(),
            (false, Some(e)) => format!("{e:.3e}"),
            (false, None) => String::new(),
        };
        [
            self.preset.clone(),
            self.grid.clone(),
            self.n_t.to_string(),
            self.dofs.to_string(),
            self.preconditioner.clone(),
            format!("{:e}", self.alpha),
            its,
            err,
            format!("{:.3}", self.wall_time),
            self.status.as_str().to_string(),
        ]
    }
}

/// Everything a run needs besides its config.
#[derive(Debug, Clone, Default)]
pub struct SolveContext {
    pub cache: Option<ReferenceCache>,
}

/// Assembles a preset on its table grid (`N_s = N_t`, `N_v = N_t/2` intervals).
pub fn build_system(cfg: &RunConfig) -> anyhow::Result<(Grid2D, AaoSystem)> {
    let preset = cfg.preset();
    let grid = preset.grid(cfg.n_t, cfg.grid_kind.spec())?;
    let problem = preset.problem_on(&grid)?;
    let u0 = preset.initial_value(&grid)?;
    let sys = assemble(&problem, preset.t_final, cfg.n_t, None, &u0)?;
    Ok((grid, sys))
}

/// Result of a solve without any pricing.
pub struct SolveOutcome {
    pub grid: Grid2D,
    pub sys: AaoSystem,
    pub alpha: f64,
    /// `None` when the preconditioner could not be built.
    pub solution: Option<(Vec<f64>, GmresReport)>,
}

pub fn solve(cfg: &RunConfig) -> anyhow::Result<SolveOutcome> {
    let (grid, sys) = build_system(cfg)?;
    let alpha = match cfg.preconditioner {
        PrecondKind::P1 => 1.0,
        _ => cfg.alpha.resolve(sys.tau(), sys.t_final()),
    };
    let gcfg = GmresConfig { restart: cfg.restart, tol: cfg.tol, max_total_iters: 2000, record_history: true };
    let b = sys.rhs().as_slice();
    let solution = match cfg.preconditioner {
        PrecondKind::None => Some(gmres(&sys, b, &gcfg)?),
        PrecondKind::P1 | PrecondKind::Palpha => match AlphaPreconditioner::build(alpha, &sys) {
            Ok(pc) => Some(gmres_right(&sys, &pc, b, &gcfg)?),
            Err(Error::SingularPreconditioner { .. }) => None,
            Err(e) => return Err(e.into()),
        },
    };
    Ok(SolveOutcome { grid, sys, alpha, solution })
}

/// Price at `(S₀, V₀)` from the last time block of `x`.
pub fn terminal_price(cfg: &RunConfig, grid: &Grid2D, sys: &AaoSystem, x: &[f64]) -> anyhow::Result<f64> {
    let preset = cfg.preset();
    let n = sys.n_space();
    let last = &x[(sys.m_steps() - 1) * n..];
    Ok(price_at(&PriceQuery { s0: preset.s0, v0: preset.v0, grid, terminal_slice: last })?)
}

pub fn run_solve(cfg: &RunConfig, ctx: &SolveContext) -> anyhow::Result<TableRow> {
    cfg.validate().map_err(anyhow::Error::msg)?;
    let start = Instant::now();
    let out = solve(cfg)?;
    let wall_time = start.elapsed().as_secs_f64();
    let mut row = TableRow {
        preset: cfg.preset.to_string(),
        grid: cfg.grid_kind.to_string(),
        n_t: cfg.n_t,
        dofs: out.sys.dim(),
        preconditioner: cfg.preconditioner.to_string(),
        alpha: out.alpha,
        its: None,
        price: None,
        reference: None,
        err: None,
        wall_time,
        status: RowStatus::Singular,
    };
    let Some((x, report)) = out.solution else {
        return Ok(row);
    };
    row.its = Some(report.iterations);
    row.status = if report.converged { RowStatus::Converged } else { RowStatus::NotConverged };
    let price = terminal_price(cfg, &out.grid, &out.sys, &x)?;
    row.price = Some(price);
    if let Some(level) = cfg.outputs.reference_level {
        let r = reference_price(&cfg.preset(), level, ctx.cache.as_ref())?;
        row.reference = Some(r.price);
        row.err = Some(relative_error(price, r.price)?);
    }
    Ok(row)
}

pub fn write_table(path: &Path, rows: &[TableRow]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TABLE_COLUMNS)?;
    for r in rows {
        w.write_record(r.csv_record())?;
    }
    w.flush()?;
    write_meta(&meta_path(path), rows)?;
    Ok(())
}

/// `<table>.meta` next to the CSV.
pub fn meta_path(table: &Path) -> std::path::PathBuf {
    let mut name = table.as_os_str().to_owned();
    name.push(".meta");
    name.into()
}

fn write_meta(path: &Path, rows: &[TableRow]) -> anyhow::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "grid_counts = intervals")?;
    writeln!(f, "convention = N_s = N_t, N_v = N_t/2 intervals per axis; DoFs = N_t * N_s * N_v")?;
    writeln!(f, "solver = right-preconditioned GMRES, zero initial guess")?;
    writeln!(f, "marker = {SINGULAR_MARK} means the preconditioner is singular and no solve was attempted")?;
    let refs: std::collections::BTreeMap<&str, f64> =
        rows.iter().filter_map(|r| Some((r.preset.as_str(), r.reference?))).collect();
    for (preset, price) in refs {
        writeln!(f, "reference[{preset}] = {price:.12e}")?;
    }
    Ok(())
}
