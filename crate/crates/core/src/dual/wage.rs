use serde::{Deserialize, Serialize};

use super::grid::{maximize_1d, GridSpec};
use super::{DualConfig, DualError};
use crate::model::units::hourly_to_per_minute;
use crate::model::BehaviorParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WageOptimum {
    /// Wage, $/hour.
    pub q: f64,
    /// Human vehicle-hours hired at that wage.
    pub hired: f64,
    /// (μ − q)·hired, $/min.
    pub value: f64,
}

/// Wage term of the Lagrangian, (μ − q)·N₀F_d(q), with `q` in $/hour and
/// `mu` in $/min.
pub fn wage_lagrangian(params: &BehaviorParams, mu: f64, q: f64) -> f64 {
    (mu - hourly_to_per_minute(q)) * params.willing_supply(q)
}

/// Best wage on the refined grid over [max(q_lo, floor), q_hi].
///
/// Without a floor every willing driver is hired. With a floor the platform
/// may hire any part of the willing supply, so it hires all of it when the
/// term is positive and nobody (at the floor wage) otherwise.
pub fn wage_subproblem(
    params: &BehaviorParams,
    mu: f64,
    floor: Option<f64>,
    config: &DualConfig,
) -> Result<WageOptimum, DualError> {
    let g = config.wage_grid;
    let lo = g.lo.max(floor.unwrap_or(0.0));
    if lo > g.hi {
        return Err(DualError::Config(format!(
            "wage floor {lo} $/h lies above the wage grid end {} $/h",
            g.hi
        )));
    }
    let grid = GridSpec::new(lo, g.hi, g.points);
    let (q, value) = maximize_1d(grid, config.zoom_passes, config.zoom_factor, |q| wage_lagrangian(params, mu, q));
    if floor.is_some() && value <= 0.0 {
        return Ok(WageOptimum { q: lo, hired: 0.0, value: 0.0 });
    }
    Ok(WageOptimum { q, hired: params.willing_supply(q), value })
}
