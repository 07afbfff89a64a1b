//! Experiment runner: table rows, spectrum files and the verification suite.

pub mod bench;
pub mod config;
pub mod criteria;
pub mod solve;
pub mod spectrum;
pub mod verify;

pub use config::{AlphaSpec, ConfigError, GridChoice, Outputs, PrecondKind, RunConfig};
pub use criteria::{CheckEnv, CheckOutcome, Scope};
pub use solve::{run_solve, write_table, RowStatus, SolveContext, TableRow};
pub use spectrum::{run_spectrum, SpectrumFiles, SpectrumStatus};
pub use verify::{run_verify, VerifyScope, VerifySummary};
