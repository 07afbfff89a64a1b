//! Run configurations and TOML batch files.
//!
//! A batch lists one `[[run]]` table per experiment:
//!
//! ```toml
//! [[run]]
//! preset = "I"
//! nt = 48
//! precond = "Palpha"
//! alpha = 1e-3
//! grid = "uniform"
//! table = "out/set1.csv"
//! ```

use cnpint_core::precond::{alpha_policy, DEFAULT_ALPHA};
use cnpint_core::pricing::DEFAULT_REFERENCE_LEVEL;
use cnpint_core::spatial::{GridSpec, Preset, SetId};
use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("bad batch file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("run {index}: {message}")]
    Invalid { index: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum PrecondKind {
    #[serde(rename = "P1", alias = "p1")]
    P1,
    #[serde(rename = "Palpha", alias = "palpha", alias = "alpha")]
    Palpha,
    #[serde(rename = "none")]
    None,
}

impl fmt::Display for PrecondKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecondKind::P1 => "P1",
            PrecondKind::Palpha => "Palpha",
            PrecondKind::None => "none",
        })
    }
}

impl FromStr for PrecondKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(PrecondKind::P1),
            "palpha" | "alpha" => Ok(PrecondKind::Palpha),
            "none" => Ok(PrecondKind::None),
            _ => Err(format!("unknown preconditioner `{s}` (P1, Palpha, none)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridChoice {
    Uniform,
    Nonuniform,
}

impl GridChoice {
    pub fn spec(self) -> GridSpec {
        match self {
            GridChoice::Uniform => GridSpec::UNIFORM,
            GridChoice::Nonuniform => GridSpec::nonuniform(),
        }
    }
}

impl fmt::Display for GridChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridChoice::Uniform => "uniform",
            GridChoice::Nonuniform => "nonuniform",
        })
    }
}

impl FromStr for GridChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(GridChoice::Uniform),
            "nonuniform" | "stretched" => Ok(GridChoice::Nonuniform),
            _ => Err(format!("unknown grid `{s}` (uniform, nonuniform)")),
        }
    }
}

/// Either a fixed `α` or `α = δ√(τ/T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSpec {
    Fixed(f64),
    DeltaSqrtTauOverT(f64),
}

impl AlphaSpec {
    pub fn resolve(self, tau: f64, t_final: f64) -> f64 {
        match self {
            AlphaSpec::Fixed(a) => a,
            AlphaSpec::DeltaSqrtTauOverT(delta) => alpha_policy(delta, tau, t_final),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub table_path: Option<PathBuf>,
    pub spectrum_path: Option<PathBuf>,
    /// `None` skips the reference solve and leaves `Err` empty.
    pub reference_level: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: SetId,
    pub n_t: usize,
    pub alpha: AlphaSpec,
    pub preconditioner: PrecondKind,
    pub grid_kind: GridChoice,
    pub outputs: Outputs,
    pub restart: usize,
    pub tol: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(preset: SetId, n_t: usize) -> Self {
        Self {
            preset,
            n_t,
            alpha: AlphaSpec::Fixed(DEFAULT_ALPHA),
            preconditioner: PrecondKind::Palpha,
            grid_kind: GridChoice::Uniform,
            outputs: Outputs { reference_level: Some(DEFAULT_REFERENCE_LEVEL), ..Default::default() },
            restart: 40,
            tol: 1e-9,
            seed: 0,
        }
    }

    pub fn with_precond(mut self, p: PrecondKind) -> Self {
        self.preconditioner = p;
        self
    }

    pub fn without_reference(mut self) -> Self {
        self.outputs.reference_level = None;
        self
    }

    pub fn preset(&self) -> Preset {
        Preset::get(self.preset)
    }

    /// `N_t ≥ 1` and a resolvable `α`.
    pub fn validate(&self) -> Result<(), String> {
        if self.n_t == 0 {
            return Err("nt must be at least 1".into());
        }
        let a = self.alpha.resolve(1.0 / self.n_t as f64, 1.0);
        if !(a > 0.0 && a <= 1.0) {
            return Err(format!("alpha {a} must lie in (0, 1]"));
        }
        if self.restart == 0 || !(self.tol > 0.0 && self.tol < 1.0) {
            return Err("restart must be positive and tol in (0, 1)".into());
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    preset: String,
    nt: usize,
    alpha: Option<f64>,
    alpha_policy: Option<String>,
    delta: Option<f64>,
    precond: Option<PrecondKind>,
    grid: Option<GridChoice>,
    table: Option<PathBuf>,
    spectrum: Option<PathBuf>,
    reference_level: Option<i64>,
    restart: Option<usize>,
    tol: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBatch {
    #[serde(default)]
    run: Vec<RawRun>,
}

/// Resolves `--alpha`/`--alpha-policy` style inputs.
pub fn alpha_from(alpha: Option<f64>, policy: Option<&str>, delta: Option<f64>) -> Result<AlphaSpec, String> {
    match policy.map(str::to_ascii_lowercase).as_deref() {
        None | Some("fixed") => Ok(AlphaSpec::Fixed(alpha.unwrap_or(DEFAULT_ALPHA))),
        Some("delta_sqrt_tau_over_t") => Ok(AlphaSpec::DeltaSqrtTauOverT(delta.unwrap_or(0.25))),
        Some(p) => Err(format!("unknown alpha policy `{p}` (fixed, delta_sqrt_tau_over_T)")),
    }
}

impl RawRun {
    fn into_config(self, index: usize) -> Result<RunConfig, ConfigError> {
        let invalid = |message: String| ConfigError::Invalid { index, message };
        let preset: SetId = self.preset.parse().map_err(|e: cnpint_core::Error| invalid(e.to_string()))?;
        let mut cfg = RunConfig::new(preset, self.nt);
        cfg.alpha = alpha_from(self.alpha, self.alpha_policy.as_deref(), self.delta).map_err(invalid)?;
        if let Some(p) = self.precond {
            cfg.preconditioner = p;
        }
        if let Some(g) = self.grid {
            cfg.grid_kind = g;
        }
        cfg.outputs.table_path = self.table;
        cfg.outputs.spectrum_path = self.spectrum;
        // a negative level switches the reference off
        if let Some(level) = self.reference_level {
            cfg.outputs.reference_level = u32::try_from(level).ok();
        }
        cfg.restart = self.restart.unwrap_or(cfg.restart);
        cfg.tol = self.tol.unwrap_or(cfg.tol);
        cfg.seed = self.seed.unwrap_or(0);
        cfg.validate().map_err(invalid)?;
        Ok(cfg)
    }
}

pub fn parse_batch(text: &str) -> Result<Vec<RunConfig>, ConfigError> {
    let raw: RawBatch = toml::from_str(text)?;
    raw.run.into_iter().enumerate().map(|(i, r)| r.into_config(i)).collect()
}

pub fn load_batch(path: &Path) -> Result<Vec<RunConfig>, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    parse_batch(&text)
}
