//! Scenario-file driver for the TFC Lambert solver.
//!
//! The binary exposes four commands — `solve`, `sweep`, `polyscan`, and
//! `compare` — all driven by JSON scenario files and all writing CSV (and
//! optionally SVG) artifacts. This library holds their implementations so
//! the integration tests can call them without spawning processes.

use std::path::{Path, PathBuf};

pub mod commands;
pub mod scenario;
pub mod svg;

pub use commands::{
    run_compare, run_polyscan, run_solve, run_sweep, scan_cells, OutputOptions, ScanRow,
    SolveOutcome, SweepRow,
};
pub use scenario::{Scenario, SweepAxis, Units, WarmStart};

/// Failure modes with fixed process exit codes: 2 for anything wrong with
/// the inputs, 3 for degenerate transfer geometry, 4 for a solver run that
/// structurally broke down. Plain non-convergence is not an error — the
/// commands report it through their outcome types (and the binary turns it
/// into exit code 4 with the artifacts already on disk).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Singular(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Singular(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    /// Maps solver-library errors onto the exit-code taxonomy: geometry
    /// problems are their own code, bad arguments are input problems, and
    /// everything else is a runtime breakdown.
    pub fn from_core(err: tfc_lambert::Error) -> Self {
        use tfc_lambert::Error;
        match err {
            Error::SingularGeometry => CliError::Singular(err.to_string()),
            Error::InvalidArgument(_) | Error::InsufficientSamples { .. } => {
                CliError::Parse(err.to_string())
            }
            _ => CliError::Runtime(err.to_string()),
        }
    }
}

/// Where artifacts go: an explicit `--out` wins, then the
/// `TFC_LAMBERT_OUT` environment variable, then the working directory.
pub fn resolve_out_dir(explicit: Option<&Path>) -> PathBuf {
    if let Some(dir) = explicit {
        return dir.to_path_buf();
    }
    if let Some(dir) = std::env::var_os("TFC_LAMBERT_OUT") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(".")
}
