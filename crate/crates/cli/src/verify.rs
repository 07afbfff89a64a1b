//! `cnpint verify`: runs a scope of the check registry and summarises it.

use crate::criteria::{execute, registry, CheckEnv, CheckOutcome, Scope};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyScope {
    Only(Scope),
    All,
}

impl FromStr for VerifyScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "core" => Ok(VerifyScope::Only(Scope::Core)),
            "spectral" => Ok(VerifyScope::Only(Scope::Spectral)),
            "convergence" => Ok(VerifyScope::Only(Scope::Convergence)),
            "all" => Ok(VerifyScope::All),
            _ => Err(format!("unknown scope `{s}` (core, spectral, convergence, all)")),
        }
    }
}

impl fmt::Display for VerifyScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyScope::Only(s) => s.fmt(f),
            VerifyScope::All => f.write_str("all"),
        }
    }
}

impl VerifyScope {
    pub fn includes(self, s: Scope) -> bool {
        matches!(self, VerifyScope::All) || self == VerifyScope::Only(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub scope: String,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckOutcome>,
}

impl VerifySummary {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

/// Runs every check in `scope`, calling `progress` after each one.
pub fn run_verify(scope: VerifyScope, env: &CheckEnv, mut progress: impl FnMut(&CheckOutcome)) -> VerifySummary {
    let mut checks = Vec::new();
    for check in registry().iter().filter(|c| scope.includes(c.scope)) {
        let out = execute(check, env);
        progress(&out);
        checks.push(out);
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    VerifySummary { scope: scope.to_string(), passed, failed: checks.len() - passed, checks }
}
