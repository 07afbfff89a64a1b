use anyhow::{bail, Context as _};
use clap::{Args, Parser, Subcommand};
use cnpint_cli::bench::run_bench;
use cnpint_cli::config::{alpha_from, load_batch, GridChoice, PrecondKind, RunConfig};
use cnpint_cli::{
    run_solve, run_spectrum, run_verify, write_table, CheckEnv, SolveContext, SpectrumStatus, VerifyScope,
};
use cnpint_core::pricing::{ReferenceCache, DEFAULT_REFERENCE_LEVEL};
use cnpint_core::spatial::SetId;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cnpint", version, about = "All-at-once Crank-Nicolson solves with an alpha-circulant preconditioner")]
struct Cli {
    /// Worker threads; 0 keeps the rayon default.
    #[arg(long, global = true, env = "CNPINT_THREADS", default_value_t = 0)]
    threads: usize,
    /// File caching reference prices between runs.
    #[arg(long, global = true, env = "CNPINT_CACHE")]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration (or a TOML batch) and write table rows.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// TOML file with one `[[run]]` table per experiment.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Table CSV; overrides the per-run `table` key.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write eigenvalue scatter files.
    Spectrum {
        #[command(flatten)]
        run: RunArgs,
        /// Output prefix; files are `<prefix>_M.csv`, `<prefix>_P1.csv`, ...
        #[arg(long, default_value = "spectrum")]
        out: PathBuf,
    },
    /// Run the verification checks.
    Verify {
        #[arg(long, default_value = "core")]
        scope: VerifyScope,
        #[arg(long, default_value_t = CheckEnv::default().seed)]
        seed: u64,
        /// Scramble the preconditioner eigenvalues; the apply-path check must fail.
        #[arg(long)]
        corrupt_lambda: bool,
        /// Write the JSON summary here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Time the kernels on one thread and on the full pool.
    Bench {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 20)]
        reps: usize,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, default_value = "I")]
    preset: SetId,
    #[arg(long, default_value_t = 48)]
    nt: usize,
    #[arg(long)]
    alpha: Option<f64>,
    /// `fixed` or `delta_sqrt_tau_over_T`.
    #[arg(long)]
    alpha_policy: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value = "Palpha")]
    precond: PrecondKind,
    #[arg(long, default_value = "uniform")]
    grid: GridChoice,
    #[arg(long, default_value_t = DEFAULT_REFERENCE_LEVEL)]
    reference_level: u32,
    /// Skip the reference price and leave `Err` empty.
    #[arg(long)]
    no_reference: bool,
    #[arg(long, default_value_t = 40)]
    restart: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RunArgs {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig::new(self.preset, self.nt).with_precond(self.precond);
        cfg.alpha = alpha_from(self.alpha, self.alpha_policy.as_deref(), self.delta).map_err(anyhow::Error::msg)?;
        cfg.grid_kind = self.grid;
        cfg.outputs.reference_level = (!self.no_reference).then_some(self.reference_level);
        cfg.restart = self.restart;
        cfg.tol = self.tol;
        cfg.seed = self.seed;
        cfg.validate().map_err(anyhow::Error::msg)?;
        Ok(cfg)
    }
}

fn solve_command(runs: Vec<RunConfig>, out: Option<PathBuf>, ctx: &SolveContext) -> anyhow::Result<()> {
    let mut tables: Vec<(Option<PathBuf>, Vec<cnpint_cli::TableRow>)> = Vec::new();
    for cfg in &runs {
        let row = run_solve(cfg, ctx).with_context(|| format!("Set {} at N_t = {}", cfg.preset, cfg.n_t))?;
        println!("{}", row.csv_record().join(","));
        let path = out.clone().or_else(|| cfg.outputs.table_path.clone());
        match tables.iter_mut().find(|(p, _)| *p == path) {
            Some((_, rows)) => rows.push(row),
            None => tables.push((path, vec![row])),
        }
        if let Some(prefix) = &cfg.outputs.spectrum_path {
            run_spectrum(cfg, prefix)?;
        }
    }
    for (path, rows) in tables {
        if let Some(path) = path {
            write_table(&path, &rows)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn describe(s: &SpectrumStatus) -> String {
    match s {
        SpectrumStatus::Written(p) => p.display().to_string(),
        SpectrumStatus::Singular => "singular preconditioner, not written".into(),
        SpectrumStatus::Skipped(why) => format!("skipped ({why})"),
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    }
    let cache = cli.cache.map(ReferenceCache::new);
    match cli.command {
        Command::Solve { run, config, out } => {
            let runs = match config {
                Some(path) => load_batch(&path)?,
                None => vec![run.config()?],
            };
            if runs.is_empty() {
                bail!("the batch file lists no runs");
            }
            solve_command(runs, out, &SolveContext { cache })?;
        }
        Command::Spectrum { run, out } => {
            let files = run_spectrum(&run.config()?, &out)?;
            println!("system: {}", files.system.display());
            println!("operator: {}", files.operator.display());
            println!("P1: {}", describe(&files.p1));
            println!("Palpha: {}", describe(&files.palpha));
        }
        Command::Verify { scope, seed, corrupt_lambda, json } => {
            let env = CheckEnv { seed, corrupt_lambda, cache };
            let summary = run_verify(scope, &env, |c| {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                eprintln!("{mark} {} ({:.1} s): {}", c.id, c.seconds, c.detail);
            });
            let text = serde_json::to_string_pretty(&summary)?;
            match json {
                Some(path) => std::fs::write(path, text)?,
                None => println!("{text}"),
            }
            if !summary.ok() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Bench { run, reps } => {
            for line in run_bench(&run.config()?, reps.max(1))? {
                println!("{:<14} threads={:<3} {:.6e} s", line.kernel, line.threads, line.seconds);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
