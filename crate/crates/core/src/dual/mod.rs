//! Relaxed profit maximization by Lagrangian dual decomposition: the
//! human-hour coupling constraint is priced with a multiplier μ, the rest
//! splits into one fare/fleet problem per zone and one wage problem, and μ
//! follows a projected subgradient method. The best dual value is an upper
//! bound on the profit of every feasible decision.

mod grid;
mod wage;
mod zone;

pub use grid::{maximize_1d, maximize_2d, GridSpec};
pub use wage::{wage_lagrangian, wage_subproblem, WageOptimum};
pub use zone::{zone_lagrangian, zone_subproblem, ZoneOptimum};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::accounting::{fare_revenue, idle_split_accounting};
use crate::model::choice::{demand_rate, generalized_cost, passenger_wait};
use crate::model::units::hourly_to_per_minute;
use crate::model::{BehaviorParams, ModelError, NetworkInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualConfig {
    /// Starting multiplier, $/min per vehicle. Defaults to q0 per minute.
    pub mu0: Option<f64>,
    /// First step size. Defaults to |μ₀|/|g₀|; later steps are τ₀/√k.
    pub tau0: Option<f64>,
    pub max_iters: usize,
    /// Relative tolerance on the human-hour constraint.
    pub feas_tol: f64,
    /// Fares, $/min.
    pub fare_grid: GridSpec,
    /// Idle vehicles per zone range over [0, cap]; cap defaults to 3L².
    pub idle_cap: Option<f64>,
    pub idle_points: usize,
    /// Wages, $/hour.
    pub wage_grid: GridSpec,
    pub zoom_passes: usize,
    pub zoom_factor: f64,
}

impl Default for DualConfig {
    fn default() -> Self {
        Self {
            mu0: None,
            tau0: None,
            max_iters: 2000,
            feas_tol: 1e-4,
            fare_grid: GridSpec::new(0.05, 5.0, 50),
            idle_cap: None,
            idle_points: 50,
            wage_grid: GridSpec::new(1.0, 60.0, 120),
            zoom_passes: 3,
            zoom_factor: 10.0,
        }
    }
}

impl DualConfig {
    pub fn idle_cap(&self, params: &BehaviorParams) -> f64 {
        self.idle_cap.unwrap_or(3.0 * params.wait_coeff * params.wait_coeff)
    }

    pub fn initial_mu(&self, params: &BehaviorParams) -> f64 {
        self.mu0.unwrap_or(hourly_to_per_minute(params.q0))
    }

    pub fn validate(&self, params: &BehaviorParams) -> Result<(), DualError> {
        let grids = self.fare_grid.is_valid() && self.wage_grid.is_valid() && self.idle_points > 0;
        let cap = self.idle_cap(params);
        let ok = grids
            && self.fare_grid.lo > 0.0
            && cap.is_finite()
            && cap > 0.0
            && self.max_iters > 0
            && self.feas_tol > 0.0
            && self.zoom_factor >= 1.0
            && self.mu0.is_none_or(f64::is_finite)
            && self.tau0.is_none_or(|t| t.is_finite() && t >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(DualError::Config(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid dual config: {0}")]
    Config(String),
    #[error("multiplier diverged to {mu} at iteration {iteration}; reduce the step size (tau0 = {tau0})")]
    Divergent { iteration: usize, mu: f64, tau0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Feasible,
    MaxIters,
}

/// Solution of the relaxed problem and its dual bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxedSolution {
    /// Wage, $/hour.
    pub q: f64,
    pub r: Array1<f64>,
    pub idle_av: Array1<f64>,
    pub idle_h: Array1<f64>,
    /// Human vehicle-hours hired at `q`.
    pub hired: f64,
    /// Human vehicle-hours the zone choices use.
    pub used: f64,
    /// Best dual value min_k L(μ_k), $/min.
    pub upper_bound: f64,
    /// Multiplier that attained the bound.
    pub mu_best: f64,
    /// Relative human-hour residual of the reported primal point.
    pub residual: f64,
    pub termination: Termination,
    pub iterations: usize,
    pub mu0: f64,
    pub tau0: f64,
    pub mu_trace: Vec<f64>,
    /// Zones whose idle count sits on the grid cap.
    pub zones_at_cap: Vec<usize>,
}

/// Projected subgradient step μ − τg; `g` is hired minus used human hours.
pub fn dual_update(mu: f64, g: f64, tau: f64, regulated: bool) -> f64 {
    let next = mu - tau * g;
    if regulated {
        next.max(0.0)
    } else {
        next
    }
}

/// The Lagrangian evaluated directly from the market formulas: revenue minus
/// AV cost minus the wage bill, plus μ times (hired − used human hours).
#[allow(clippy::too_many_arguments)]
pub fn lagrangian(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    mu: f64,
    q: f64,
    hired: f64,
    r: &Array1<f64>,
    idle_av: &Array1<f64>,
    idle_h: &Array1<f64>,
) -> f64 {
    let m = instance.num_zones();
    let t = instance.travel_time();
    let w_p = Array1::from_iter(
        (0..m).map(|i| passenger_wait(params.wait_coeff, idle_av[i] + idle_h[i]).unwrap_or(f64::INFINITY)),
    );
    let lambda = Array2::from_shape_fn((m, m), |(i, j)| {
        let c = generalized_cost(params.alpha, w_p[i], r[i], t[[i, j]]);
        demand_rate(instance.potential_demand()[[i, j]], c, instance.outside_cost()[[i, j]], params.eps)
    });
    let hours = idle_split_accounting(&lambda, t, &w_p, idle_h, idle_av);
    fare_revenue(&lambda, r, t) - params.av_cost_per_minute() * hours.n_a() - hourly_to_per_minute(q) * hired
        + mu * (hired - hours.n_h())
}

struct Primal {
    zones: Vec<ZoneOptimum>,
    wage: WageOptimum,
    value: f64,
    used: f64,
}

impl Primal {
    fn gap(&self) -> f64 {
        self.wage.hired - self.used
    }

    fn relative_gap(&self) -> f64 {
        let scale = self.wage.hired.abs().max(self.used.abs());
        if scale > 0.0 {
            self.gap().abs() / scale
        } else {
            0.0
        }
    }
}

fn solve_subproblems(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    mu: f64,
    floor: Option<f64>,
    config: &DualConfig,
    av_cache: &mut Option<Vec<ZoneOptimum>>,
) -> Result<Primal, DualError> {
    let all_av = params.av_cost_per_minute() <= mu;
    let zones = match av_cache {
        Some(z) if all_av => z.clone(),
        _ => {
            let z: Vec<ZoneOptimum> =
                (0..instance.num_zones()).map(|i| zone_subproblem(instance, params, i, mu, config)).collect();
            if all_av {
                *av_cache = Some(z.clone());
            }
            z
        }
    };
    let wage = wage_subproblem(params, mu, floor, config)?;
    let used = zones.iter().map(|z| z.human_hours).sum();
    let value = zones.iter().map(|z| z.value).sum::<f64>() + wage.value;
    Ok(Primal { zones, wage, value, used })
}

/// Primal point at μ = D, where every zone is indifferent between fleets.
/// When the hired hours fit into the hours of the zones' choices, the left
/// derivative of the dual is nonpositive there, so μ = D minimizes it, and
/// giving each zone the same human fraction of its idle fleet meets the
/// coupling constraint exactly at the same Lagrangian value.
fn kink_primal(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    floor: Option<f64>,
    config: &DualConfig,
    av_cache: &mut Option<Vec<ZoneOptimum>>,
) -> Result<Option<Primal>, DualError> {
    let at = solve_subproblems(instance, params, params.av_cost_per_minute(), floor, config, av_cache)?;
    let hours: f64 = at.zones.iter().map(|z| z.av_hours + z.human_hours).sum();
    let hired = at.wage.hired;
    if !(hours > 0.0 && hired <= hours) {
        return Ok(None);
    }
    let phi = hired / hours;
    let zones = at
        .zones
        .iter()
        .map(|z| {
            let n = z.idle_av + z.idle_h;
            let h = z.av_hours + z.human_hours;
            ZoneOptimum {
                idle_av: (1.0 - phi) * n,
                idle_h: phi * n,
                av_hours: (1.0 - phi) * h,
                human_hours: phi * h,
                ..*z
            }
        })
        .collect();
    Ok(Some(Primal { zones, wage: at.wage, value: at.value, used: hired }))
}

/// Subgradient method on the dual of the relaxed problem. Stops when the
/// primal point meets the human-hour constraint (with complementary
/// slackness when `regulated`) or after `max_iters` iterations.
pub fn run_dual(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    config: &DualConfig,
    regulated: bool,
) -> Result<RelaxedSolution, DualError> {
    params.validate()?;
    config.validate(params)?;
    let floor = if regulated { Some(params.q_min.unwrap_or(0.0)) } else { None };
    let mu0 = config.initial_mu(params);
    let mut mu = if regulated { mu0.max(0.0) } else { mu0 };
    let mut tau0 = config.tau0;
    let mut av_cache = None;
    let mut trace = Vec::new();
    let mut best_bound = (f64::INFINITY, mu);
    let mut best_primal: Option<Primal> = None;
    let mut termination = Termination::MaxIters;
    let mut iterations = 0;
    let d = params.av_cost_per_minute();
    let (mut below, mut above, mut kink_checked) = (false, false, false);
    for k in 1..=config.max_iters {
        iterations = k;
        below |= mu < d;
        above |= mu >= d;
        if below && above && !kink_checked {
            kink_checked = true;
            if let Some(primal) = kink_primal(instance, params, floor, config, &mut av_cache)? {
                trace.push(d);
                if primal.value < best_bound.0 {
                    best_bound = (primal.value, d);
                }
                best_primal = Some(primal);
                termination = Termination::Feasible;
                break;
            }
        }
        trace.push(mu);
        let primal = solve_subproblems(instance, params, mu, floor, config, &mut av_cache)?;
        if primal.value < best_bound.0 {
            best_bound = (primal.value, mu);
        }
        let g = primal.gap();
        let rel = primal.relative_gap();
        let feasible = if regulated {
            g >= -config.feas_tol * primal.used.abs().max(primal.wage.hired) && (mu == 0.0 || rel <= config.feas_tol)
        } else {
            rel <= config.feas_tol
        };
        let closer = best_primal.as_ref().is_none_or(|b| rel < b.relative_gap());
        if feasible || closer {
            best_primal = Some(primal);
        }
        if feasible {
            termination = Termination::Feasible;
            break;
        }
        let step0 = *tau0.get_or_insert_with(|| {
            let scale = if mu != 0.0 { mu.abs() } else { hourly_to_per_minute(params.q0) };
            scale / g.abs()
        });
        mu = dual_update(mu, g, step0 / (k as f64).sqrt(), regulated);
        if !mu.is_finite() || mu.abs() > 1e6 {
            return Err(DualError::Divergent { iteration: k, mu, tau0: step0 });
        }
    }
    let primal = best_primal.expect("at least one iteration");
    let cap = config.idle_cap(params);
    let zones_at_cap = primal
        .zones
        .iter()
        .enumerate()
        .filter(|(_, z)| z.idle_av + z.idle_h >= cap * (1.0 - 1e-12))
        .map(|(i, _)| i)
        .collect();
    Ok(RelaxedSolution {
        q: primal.wage.q,
        r: primal.zones.iter().map(|z| z.r).collect(),
        idle_av: primal.zones.iter().map(|z| z.idle_av).collect(),
        idle_h: primal.zones.iter().map(|z| z.idle_h).collect(),
        hired: primal.wage.hired,
        used: primal.used,
        upper_bound: best_bound.0,
        mu_best: best_bound.1,
        residual: primal.relative_gap(),
        termination,
        iterations,
        mu0,
        tau0: tau0.unwrap_or(0.0),
        mu_trace: trace,
        zones_at_cap,
    })
}

/// Dual function value L(μ) on the configured grids.
pub fn dual_value(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    mu: f64,
    regulated: bool,
    config: &DualConfig,
) -> Result<f64, DualError> {
    let floor = if regulated { Some(params.q_min.unwrap_or(0.0)) } else { None };
    Ok(solve_subproblems(instance, params, mu, floor, config, &mut None)?.value)
}
