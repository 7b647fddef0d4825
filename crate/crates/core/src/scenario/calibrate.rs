//! Fits the no-AV market to observed aggregates: the potential-demand scale
//! fixes the mode share once total demand is on target, and a common shift
//! of the outside-option costs moves total demand.

use log::info;
use serde::{Deserialize, Serialize};

use super::files::ScenarioParams;
use super::solve::{solve, Solution};
use super::ScenarioError;
use crate::model::NetworkInstance;

/// AV cost that keeps every AV off the road, $/hour.
pub const PROHIBITIVE_AV_COST: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationTarget {
    /// Realized demand, passengers/min.
    pub demand: f64,
    /// Realized over potential demand.
    pub mode_share: f64,
    /// Relative tolerance on demand.
    pub demand_tol: f64,
    /// Absolute tolerance on the mode share.
    pub share_tol: f64,
    /// Drivers, wage ($/hour) and mean fare ($/ride) reported alongside.
    pub reference: (f64, f64, f64),
}

impl Default for CalibrationTarget {
    fn default() -> Self {
        Self {
            demand: 148.0,
            mode_share: 0.15,
            demand_tol: 0.02,
            share_tol: 0.01,
            reference: (3703.0, 26.2, 20.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Factor applied to potential demand.
    pub demand_scale: f64,
    /// Added to every outside-option cost, $.
    pub outside_shift: f64,
    pub total_demand: f64,
    pub mode_share: f64,
    pub drivers: f64,
    /// $/hour.
    pub wage: f64,
    /// $/ride.
    pub mean_fare: f64,
    pub reference_drivers: f64,
    pub reference_wage: f64,
    pub reference_fare: f64,
    /// Demand and mode share both within tolerance.
    pub on_target: bool,
    /// Aggregates within ±20 % of the reference values.
    pub near_reference: bool,
    pub solves: usize,
}

fn shifted(instance: &NetworkInstance, scale: f64, shift: f64) -> Result<NetworkInstance, ScenarioError> {
    Ok(NetworkInstance::new(
        instance.zones().to_vec(),
        instance.travel_time().clone(),
        instance.potential_demand() * scale,
        instance.outside_cost().mapv(|c| (c + shift).max(0.0)),
    )?)
}

/// Demand miss, shifted instance and its solution.
type Probe = (f64, NetworkInstance, Solution);

fn keep_closer(best: &mut (f64, Probe), shift: f64, probe: Probe) {
    if probe.0.abs() < best.1 .0.abs() {
        *best = (shift, probe);
    }
}

/// Returns the calibrated instance and a report on its no-AV equilibrium.
/// When the targets cannot be bracketed the closest point found is returned
/// with `on_target` false.
pub fn calibrate(
    instance: &NetworkInstance,
    params: &ScenarioParams,
    target: &CalibrationTarget,
) -> Result<(NetworkInstance, CalibrationReport), ScenarioError> {
    let potential = instance.total_potential_demand();
    if potential <= 0.0 {
        return Err(ScenarioError::Config("calibration needs positive potential demand".into()));
    }
    let mut no_av = params.clone();
    no_av.behavior.av_cost = PROHIBITIVE_AV_COST;
    no_av.behavior.q_min = None;
    // the scale that makes the share exact once demand hits its target
    let mut scale = target.demand / target.mode_share / potential;
    if (scale - 1.0).abs() < 1e-12 {
        scale = 1.0;
    }
    let inner_tol = 0.25 * target.demand_tol * target.demand;

    let mut solves = 0;
    let mut run = |shift: f64| -> Result<Probe, ScenarioError> {
        solves += 1;
        let inst = shifted(instance, scale, shift)?;
        let sol = solve(&inst, &no_av, false, None)?;
        info!("calibration shift {shift:.4}: demand {:.3}", sol.summary.demand);
        Ok((sol.summary.demand - target.demand, inst, sol))
    };

    let mut best = (0.0, run(0.0)?);
    if best.1 .0.abs() > inner_tol {
        // demand rises with the outside-option cost
        let dir = if best.1 .0 < 0.0 { 1.0 } else { -1.0 };
        let (mut lo, mut f_lo) = (0.0, best.1 .0);
        let mut hi = None;
        let mut step = 2.0;
        while step <= 64.0 {
            let s = dir * step;
            let r = run(s)?;
            let f = r.0;
            keep_closer(&mut best, s, r);
            if f.signum() != f_lo.signum() {
                hi = Some(s);
                break;
            }
            lo = s;
            f_lo = f;
            step *= 2.0;
        }
        if let Some(mut hi) = hi {
            for _ in 0..40 {
                if best.1 .0.abs() <= inner_tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let r = run(mid)?;
                let f = r.0;
                keep_closer(&mut best, mid, r);
                if f.signum() == f_lo.signum() {
                    lo = mid;
                    f_lo = f;
                } else {
                    hi = mid;
                }
            }
        }
    }
    let (shift, (_, inst, sol)) = best;
    let s = &sol.summary;
    let (rd, rw, rf) = target.reference;
    let near = |v: f64, r: f64| (v - r).abs() <= 0.2 * r;
    let report = CalibrationReport {
        demand_scale: scale,
        outside_shift: shift,
        total_demand: s.demand,
        mode_share: s.mode_share,
        drivers: s.n_h,
        wage: s.wage,
        mean_fare: s.mean_fare,
        reference_drivers: rd,
        reference_wage: rw,
        reference_fare: rf,
        on_target: (s.demand - target.demand).abs() <= target.demand_tol * target.demand
            && (s.mode_share - target.mode_share).abs() <= target.share_tol,
        near_reference: near(s.n_h, rd) && near(s.wage, rw) && near(s.mean_fare, rf),
        solves,
    };
    Ok((inst, report))
}
