use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::av_flow::feasible_av_flow;
use super::existence::{check_existence_conditions, ExistenceReport};
use super::scalar::ZoneResponse;
use super::{EquilibriumConfig, EquilibriumError};
use crate::model::accounting::{self, human_dropoffs};
use crate::model::choice::{demand_rate, generalized_cost, passenger_wait, reposition_probs};
use crate::model::{BehaviorParams, MarketState, NetworkInstance, PlatformDecision};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub state: MarketState,
    pub converged: bool,
    pub iterations: usize,
    /// Largest relative residual of the human balance and hour constraints.
    pub residual: f64,
    pub existence: Option<ExistenceReport>,
}

/// Everything the map needs at one idle-human configuration.
pub(crate) struct Snapshot {
    pub lambda: Array2<f64>,
    pub w_p: Array1<f64>,
    pub w_d: Array1<f64>,
    pub delta: f64,
    pub tbar: Vec<Option<f64>>,
    pub ebar: Vec<Option<f64>>,
    pub p: Array2<f64>,
    /// Human drivers dropping off in each zone per minute.
    pub dropoffs: Array1<f64>,
    /// Human drivers repositioning into each zone per minute.
    pub inbound: Array1<f64>,
    /// Human pickups out of each zone per minute.
    pub pickups: Array1<f64>,
    /// Human hours spent carrying or fetching passengers.
    pub busy_hours: f64,
}

pub(crate) fn snapshot(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    decision: &PlatformDecision,
    budget: f64,
    idle_h: &Array1<f64>,
) -> Result<Snapshot, EquilibriumError> {
    let m = instance.num_zones();
    let t = instance.travel_time();
    let l0 = instance.potential_demand();
    let c0 = instance.outside_cost();
    let idle_total = &decision.idle_av + idle_h;
    let w_p = idle_total.mapv(|n| passenger_wait(params.wait_coeff, n).unwrap_or(f64::INFINITY));
    let lambda = Array2::from_shape_fn((m, m), |(i, j)| {
        let c = generalized_cost(params.alpha, w_p[i], decision.r[i], t[[i, j]]);
        demand_rate(l0[[i, j]], c, c0[[i, j]], params.eps)
    });
    let delta = accounting::commission_from_wage(decision.q, budget, &lambda, &decision.r, t)
        .map(|c| c.delta)
        .unwrap_or(0.0);
    let stats = accounting::trip_stats(&lambda, t, &decision.r, delta);
    let w_d = accounting::vehicle_wait(&idle_total, &lambda);
    let p = reposition_probs(&stats.ebar, &stats.tbar, w_d.as_slice().unwrap(), t, params.eta);
    let dropoffs = human_dropoffs(&lambda, idle_h, &decision.idle_av)?;
    let inbound = p.t().dot(&dropoffs);
    let shares = accounting::idle_shares(idle_h, &decision.idle_av);
    let mut pickups = Array1::zeros(m);
    let mut busy_hours = 0.0;
    for i in 0..m {
        let s = shares[i].1;
        if s == 0.0 {
            continue;
        }
        for j in 0..m {
            let l = lambda[[i, j]];
            if l > 0.0 {
                pickups[i] += s * l;
                busy_hours += s * l * (t[[i, j]] + w_p[i]);
            }
        }
    }
    Ok(Snapshot {
        lambda,
        w_p,
        w_d,
        delta,
        tbar: stats.tbar,
        ebar: stats.ebar,
        p,
        dropoffs,
        inbound,
        pickups,
        busy_hours,
    })
}

impl Snapshot {
    /// Norm-wise relative residuals of the human balance and the human-hour
    /// budget at `idle_h`.
    pub fn residual(&self, idle_h: &Array1<f64>, budget: f64) -> f64 {
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..idle_h.len() {
            worst = worst.max((self.inbound[i] - self.pickups[i]).abs());
            let inflow = self.dropoffs[i] + self.inbound[i];
            let outflow = self.pickups[i] + self.dropoffs[i];
            scale = scale.max(inflow).max(outflow);
        }
        let balance = if scale > 0.0 { worst / scale } else { 0.0 };
        let hours = (budget - self.busy_hours - idle_h.sum()).abs() / budget;
        balance.max(hours)
    }
}

fn initial_iterate(instance: &NetworkInstance, budget: f64) -> Array1<f64> {
    let out = Array1::from(instance.outbound_potential());
    let total = out.sum();
    let m = out.len();
    if total > 0.0 {
        out * (0.5 * budget / total)
    } else {
        Array1::from_elem(m, 0.5 * budget / m as f64)
    }
}

/// Zone-to-zone transition of a human driver from one pickup to the next:
/// destination split of trips out of i, then the repositioning choice.
fn transfer_matrix(instance: &NetworkInstance, params: &BehaviorParams, decision: &PlatformDecision, snap: &Snapshot) -> Array2<f64> {
    let m = instance.num_zones();
    let l0 = instance.potential_demand();
    let t = instance.travel_time();
    let c0 = instance.outside_cost();
    let mut split = Array2::zeros((m, m));
    for i in 0..m {
        let out = snap.lambda.row(i).sum();
        if out > 0.0 {
            split.row_mut(i).assign(&(&snap.lambda.row(i) / out));
            continue;
        }
        // without service the split tends to λ⁰_ij·e^{-ε(r_i t_ij - c⁰_ij)}
        let logits: Vec<f64> = (0..m)
            .map(|j| {
                if l0[[i, j]] > 0.0 {
                    l0[[i, j]].ln() - params.eps * (decision.r[i] * t[[i, j]] - c0[[i, j]])
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top.is_finite() {
            let w: Vec<f64> = logits.iter().map(|z| (z - top).exp()).collect();
            let s: f64 = w.iter().sum();
            for j in 0..m {
                split[[i, j]] = w[j] / s;
            }
        }
    }
    split.dot(&snap.p)
}

/// Probability vector v with v = Qᵀv.
fn stationary(q: &Array2<f64>) -> Option<Array1<f64>> {
    let m = q.nrows();
    let mut a = DMatrix::from_fn(m, m, |i, j| q[[j, i]] - if i == j { 1.0 } else { 0.0 });
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(m);
    rhs[m - 1] = 1.0;
    let v = a.lu().solve(&rhs)?;
    let v = Array1::from_iter(v.iter().map(|x| x.max(0.0)));
    let total = v.sum();
    (total > 0.0 && total.is_finite()).then(|| v / total)
}

/// Idle humans per zone when human pickups are `kappa·v`, with the hours
/// they imply. `guess` seeds each zone's root search.
fn idle_for_scale(
    zones: &[ZoneResponse],
    v: &Array1<f64>,
    kappa: f64,
    budget: f64,
    tol: f64,
    guess: &Array1<f64>,
) -> (Array1<f64>, f64) {
    let mut hours = 0.0;
    let x = Array1::from_iter(zones.iter().enumerate().map(|(i, z)| {
        let xi = z.invert_near(kappa * v[i], budget, tol, Some(guess[i])).unwrap_or(budget);
        hours += xi + z.human_busy_hours(xi);
        xi
    }));
    (x, hours)
}

/// Scale of the pickup pattern `v` that uses exactly `budget` human hours,
/// by regula falsi with the Illinois modification.
fn fit_budget(zones: &[ZoneResponse], v: &Array1<f64>, budget: f64, tol: f64, guess: &Array1<f64>) -> Array1<f64> {
    let kappa_max = zones
        .iter()
        .zip(v.iter())
        .filter(|(_, vi)| **vi > 0.0)
        .map(|(z, vi)| z.human_pickups(budget) / vi)
        .fold(f64::INFINITY, f64::min);
    let (mut x_hi, h_hi) = idle_for_scale(zones, v, kappa_max, budget, tol, guess);
    if h_hi <= budget {
        return x_hi;
    }
    let (mut a, mut fa) = (0.0, -budget);
    let (mut b, mut fb) = (kappa_max, h_hi - budget);
    let mut x_lo = Array1::zeros(zones.len());
    let mut side = 0i8;
    let mut seed = guess.clone();
    for _ in 0..200 {
        let mut c = b - fb * (b - a) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let (x, h) = idle_for_scale(zones, v, c, budget, tol, &seed);
        let fc = h - budget;
        if fc.abs() <= 1e-14 * budget || (b - a) <= 1e-15 * b {
            return x;
        }
        if fc < 0.0 {
            (a, fa) = (c, fc);
            x_lo = x.clone();
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            (b, fb) = (c, fc);
            x_hi = x.clone();
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        seed = x;
    }
    if fa.abs() < fb.abs() {
        x_lo
    } else {
        x_hi
    }
}

/// Anderson mixing over the last `depth` iterates of x ↦ G(x).
struct Anderson {
    depth: usize,
    xs: Vec<Array1<f64>>,
    fs: Vec<Array1<f64>>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Self { depth, xs: Vec::new(), fs: Vec::new() }
    }

    fn is_empty(&self) -> bool {
        self.xs.len() < 2
    }

    fn clear(&mut self) {
        self.xs.clear();
        self.fs.clear();
    }

    /// Next iterate from x and its step G(x) − x, or `None` while there is
    /// not enough history (or acceleration is off).
    fn extrapolate(&mut self, x: &Array1<f64>, f: &Array1<f64>) -> Option<Array1<f64>> {
        if self.depth == 0 {
            return None;
        }
        self.xs.push(x.clone());
        self.fs.push(f.clone());
        if self.xs.len() > self.depth + 1 {
            self.xs.remove(0);
            self.fs.remove(0);
        }
        let k = self.xs.len() - 1;
        if k == 0 {
            return None;
        }
        let m = x.len();
        let df = DMatrix::from_fn(m, k, |i, j| self.fs[j + 1][i] - self.fs[j][i]);
        let dx = DMatrix::from_fn(m, k, |i, j| self.xs[j + 1][i] - self.xs[j][i]);
        let rhs = DVector::from_iterator(m, f.iter().copied());
        let gamma = df.clone().svd(true, true).solve(&rhs, 1e-12 * df.norm()).ok()?;
        let correction = (dx + df) * gamma;
        let next = Array1::from_iter((0..m).map(|i| x[i] + f[i] - correction[i]));
        next.iter().all(|v| v.is_finite()).then_some(next)
    }
}

/// Equilibrium idle human drivers and the full market state for `decision`.
pub fn equilibrium_fixed_point(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    decision: &PlatformDecision,
    config: &EquilibriumConfig,
) -> Result<EquilibriumResult, EquilibriumError> {
    equilibrium_from(instance, params, decision, config, None)
}

/// As [`equilibrium_fixed_point`], starting the iteration from `start` when
/// given (e.g. the idle humans of a nearby decision).
///
/// Human pickups in balance satisfy h = Qᵀh for the pickup-to-pickup
/// transfer matrix Q, so each round freezes Q at the current iterate, takes
/// its stationary pattern, scales it to the human-hour budget and inverts
/// every zone's pickup curve by bisection.
pub fn equilibrium_from(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    decision: &PlatformDecision,
    config: &EquilibriumConfig,
    start: Option<&Array1<f64>>,
) -> Result<EquilibriumResult, EquilibriumError> {
    config.validate()?;
    decision.validate(instance.num_zones())?;
    let m = instance.num_zones();
    let existence = if config.check_existence {
        let report = check_existence_conditions(instance, params, decision);
        if !report.all_pass() {
            return Err(EquilibriumError::ExistenceViolated(report.failing_zones()));
        }
        Some(report)
    } else {
        None
    };
    let budget = decision.human_hours(params);
    if budget <= 0.0 || instance.total_potential_demand() == 0.0 {
        // nothing to balance: drivers, if any, idle evenly
        let idle_h = Array1::from_elem(m, budget.max(0.0) / m as f64);
        let state = assemble_state(instance, params, decision, &idle_h)?;
        return Ok(EquilibriumResult { state, converged: true, iterations: 0, residual: 0.0, existence });
    }
    let zones: Vec<ZoneResponse> = (0..m).map(|i| ZoneResponse::new(instance, params, decision, i)).collect();
    let mut x = match start {
        Some(s) if s.len() == m && s.iter().all(|v| v.is_finite() && *v >= 0.0) => s.mapv(|v| v.min(budget)),
        _ => initial_iterate(instance, budget),
    };
    let mut theta = config.damping;
    let mut history: Vec<f64> = Vec::new();
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    let mut accel = Anderson::new(config.anderson_depth);
    for iter in 0..config.max_outer_iters {
        let snap = snapshot(instance, params, decision, budget, &x)?;
        let residual = snap.residual(&x, budget);
        if residual <= config.tol_fp {
            let state = assemble_state(instance, params, decision, &x)?;
            return Ok(EquilibriumResult { state, converged: true, iterations: iter, residual, existence });
        }
        // halve the step after two rounds without a new best residual,
        // which also catches period-two oscillation
        if residual < 0.99 * best {
            best = residual;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 2 {
                if accel.is_empty() {
                    theta = (theta * 0.5).max(1e-3);
                }
                accel.clear();
                stalled = 0;
                best = residual;
            }
        }
        history.push(residual);
        let q = transfer_matrix(instance, params, decision, &snap);
        let Some(v) = stationary(&q) else {
            break;
        };
        let target = fit_budget(&zones, &v, budget, config.tol_bi, &x);
        let step = &target - &x;
        // extrapolation only pays off once the map is locally near-linear
        let accelerated = if residual < 1e-2 { accel.extrapolate(&x, &step) } else { None };
        x = match accelerated {
            Some(next) => next.mapv(|xi| xi.clamp(0.0, budget)),
            None => &x + &(step * theta),
        };
    }
    let residual = history.last().copied().unwrap_or(f64::INFINITY);
    Err(EquilibriumError::NotConverged { iterations: history.len(), residual, history })
}

/// Complete market state at idle humans `idle_h`: demand, waits, commission,
/// repositioning flows of both fleets and total vehicle hours.
pub fn assemble_state(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    decision: &PlatformDecision,
    idle_h: &Array1<f64>,
) -> Result<MarketState, EquilibriumError> {
    let budget = decision.human_hours(params);
    let snap = snapshot(instance, params, decision, budget, idle_h)?;
    let f_h = accounting::human_reposition_flow(&snap.p, &snap.lambda, idle_h, &decision.idle_av)?;
    let f_a = match &decision.av_flow {
        Some(f) => f.clone(),
        None => feasible_av_flow(instance, &snap.lambda, idle_h, &decision.idle_av)?,
    };
    let hours = accounting::idle_split_accounting(&snap.lambda, instance.travel_time(), &snap.w_p, idle_h, &decision.idle_av);
    Ok(MarketState {
        lambda: snap.lambda,
        w_p: snap.w_p,
        w_d: snap.w_d,
        idle_av: decision.idle_av.clone(),
        idle_h: idle_h.clone(),
        idle_total: &decision.idle_av + idle_h,
        f_h,
        f_a,
        n_a: hours.n_a(),
        n_h: hours.n_h(),
        delta: snap.delta,
        tbar: snap.tbar,
        ebar: snap.ebar,
        p: snap.p,
    })
}
