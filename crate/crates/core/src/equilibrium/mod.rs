//! Market equilibrium induced by a fixed platform decision: idle human
//! drivers, realized demand, repositioning flows and fleet hours.

mod av_flow;
mod existence;
mod fixed_point;
mod residuals;
mod scalar;

pub use av_flow::{feasible_av_flow, min_cost_flow};
pub use existence::{check_existence_conditions, ExistenceReport, ZoneExistence};
pub use fixed_point::{assemble_state, equilibrium_fixed_point, equilibrium_from, EquilibriumResult};
pub use residuals::{constraint_residuals, ResidualReport};
pub use scalar::{solve_idle_scalar, ZoneResponse};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquilibriumConfig {
    pub max_outer_iters: usize,
    /// Initial damping weight on the new iterate.
    pub damping: f64,
    /// Relative residual tolerance on balance and hour constraints.
    pub tol_fp: f64,
    /// Absolute tolerance of the per-zone bisection, vehicles.
    pub tol_bi: f64,
    /// Anderson acceleration memory; 0 runs the plain damped iteration.
    pub anderson_depth: usize,
    /// Refuse to iterate when the sufficient existence conditions fail.
    pub check_existence: bool,
}

impl Default for EquilibriumConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 500,
            damping: 1.0,
            tol_fp: 1e-8,
            tol_bi: 1e-10,
            anderson_depth: 5,
            check_existence: false,
        }
    }
}

impl EquilibriumConfig {
    pub fn validate(&self) -> Result<(), EquilibriumError> {
        let ok = self.damping > 0.0 && self.damping <= 1.0 && self.tol_fp > 0.0 && self.tol_bi > 0.0;
        if ok && self.max_outer_iters > 0 {
            Ok(())
        } else {
            Err(EquilibriumError::Config(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid equilibrium config: {0}")]
    Config(String),
    #[error("inbound target {target} exceeds attainable {supremum} in zone index {zone}")]
    InfeasibleTarget { zone: usize, target: f64, supremum: f64 },
    #[error("no equilibrium after {iterations} iterations, last residual {residual:e}")]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("existence conditions fail in zone indices {0:?}")]
    ExistenceViolated(Vec<usize>),
    #[error("AV imbalance sums to {sum:e}, expected zero")]
    Imbalance { sum: f64 },
}
