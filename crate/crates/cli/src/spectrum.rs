//! Eigenvalue scatter files for `𝓜`, `P₁⁻¹𝓜`, `P_α⁻¹𝓜` and `Ã`.

use crate::config::RunConfig;
use crate::solve::build_system;
use cnpint_core::analysis::{classify, preconditioned_spectrum, system_spectrum, EigenClass, SpectrumReport};
use cnpint_core::linalg::dense_eig;
use cnpint_core::Error;
use num_complex::Complex64;
use std::path::{Path, PathBuf};

/// Eigenvalues of `Ã` at most this large in modulus are classed `zero`.
pub const ZERO_EIG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumStatus {
    Written(PathBuf),
    /// `P₁` has a zero block; nothing to plot.
    Singular,
    /// The instance is past what the dense or structured routes can handle.
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFiles {
    pub system: PathBuf,
    pub operator: PathBuf,
    pub p1: SpectrumStatus,
    pub palpha: SpectrumStatus,
    pub p1_report: Option<SpectrumReport>,
    pub palpha_report: Option<SpectrumReport>,
}

fn class_name(c: EigenClass) -> &'static str {
    match c {
        EigenClass::Unit => "unit",
        EigenClass::Annulus => "annulus",
        EigenClass::Outside => "outside",
    }
}

fn write_points(path: &Path, points: impl IntoIterator<Item = (Complex64, &'static str)>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["re", "im", "class"])?;
    for (z, class) in points {
        w.write_record([format!("{:.17e}", z.re), format!("{:.17e}", z.im), class.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn file_for(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(format!("_{suffix}.csv"));
    name.into()
}

fn preconditioned(
    sys: &cnpint_core::aao::AaoSystem,
    alpha: f64,
    path: PathBuf,
) -> anyhow::Result<(SpectrumStatus, Option<SpectrumReport>)> {
    match preconditioned_spectrum(sys, alpha) {
        Ok(rep) => {
            let points = rep.eigenvalues.iter().map(|&z| (z, class_name(classify(z, alpha, rep.tol_unit).0)));
            write_points(&path, points)?;
            Ok((SpectrumStatus::Written(path), Some(rep)))
        }
        Err(Error::SingularPreconditioner { .. }) => Ok((SpectrumStatus::Singular, None)),
        Err(e @ (Error::OracleCap { .. } | Error::InvalidParameter(_))) => {
            Ok((SpectrumStatus::Skipped(e.to_string()), None))
        }
        Err(e) => Err(e.into()),
    }
}

/// Writes `<prefix>_M.csv`, `<prefix>_Atilde.csv`, `<prefix>_P1.csv` and
/// `<prefix>_Palpha.csv`, each with header `re,im,class`.
pub fn run_spectrum(cfg: &RunConfig, prefix: &Path) -> anyhow::Result<SpectrumFiles> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let (_, sys) = build_system(cfg)?;
    let alpha = cfg.alpha.resolve(sys.tau(), sys.t_final());

    let system = file_for(prefix, "M");
    write_points(&system, system_spectrum(&sys)?.into_iter().map(|z| (z, "system")))?;

    let operator = file_for(prefix, "Atilde");
    let a = dense_eig(&sys.a_tilde().to_dense(), false)?.values;
    write_points(&operator, a.into_iter().map(|z| (z, if z.norm() <= ZERO_EIG_TOL { "zero" } else { "operator" })))?;

    let (p1, p1_report) = preconditioned(&sys, 1.0, file_for(prefix, "P1"))?;
    let (palpha, palpha_report) = preconditioned(&sys, alpha, file_for(prefix, "Palpha"))?;
    Ok(SpectrumFiles { system, operator, p1, palpha, p1_report, palpha_report })
}
