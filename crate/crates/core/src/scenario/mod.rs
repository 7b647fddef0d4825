//! Instance files, synthetic generation, calibration, sweeps and reports.

mod calibrate;
mod check;
pub mod files;
pub mod generate;
mod solve;
mod sweep;

pub use calibrate::{calibrate, CalibrationReport, CalibrationTarget, PROHIBITIVE_AV_COST};
pub use check::{check, CheckItem, CheckKind, CheckReport};
pub use files::{read_instance_dir, write_instance, write_instance_dir, InstanceFiles, ScenarioParams, SolverConfig};
pub use generate::{generate_instance, GeneratorConfig};
pub use solve::{solve, write_solution, Solution, Summary, WarmStart, ZoneRow, SOLUTION_FILE, SUMMARY_FILE};
pub use sweep::{
    detect_regimes, run_sweep, write_sweep, Regime, RegimeReport, RegimeSpan, SweepPoint, SweepResult, SweepSpec,
    SweepVariable, WarmColdCheck, REGIMES_FILE, SWEEP_FILE, ZERO_FLEET,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::dual::DualError;
use crate::model::ModelError;
use crate::refine::RefineError;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: u64, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Refine(#[from] RefineError),
}

impl ScenarioError {
    /// 2 for bad input files or settings, 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Io { .. } | ScenarioError::Parse { .. } | ScenarioError::Model(_) | ScenarioError::Config(_) => 2,
            ScenarioError::Dual(DualError::Config(_) | DualError::Model(_)) => 2,
            ScenarioError::Refine(RefineError::Config(_)) => 2,
            ScenarioError::Dual(_) | ScenarioError::Refine(_) => 3,
        }
    }
}
