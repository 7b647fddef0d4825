//! Feasible decisions for the original problem: the relaxed solution seeds a
//! derivative-free pattern search over (wage, fares, idle AVs) in which every
//! candidate is priced through the market equilibrium.

use log::warn;
use ndarray::Array1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::{DualConfig, RelaxedSolution};
use crate::equilibrium::{constraint_residuals, equilibrium_from, EquilibriumConfig, ResidualReport};
use crate::model::{platform_profit, welfare, BehaviorParams, MarketMetrics, MarketState, NetworkInstance, PlatformDecision};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineConfig {
    pub max_evals: usize,
    /// First step as a fraction of each coordinate's scale.
    pub step: f64,
    pub shrink: f64,
    /// Search stops once the step fraction falls below this.
    pub min_step: f64,
    /// Hire any part of the willing supply at a wage no lower than q_min.
    pub regulated: bool,
    /// Wage floor, $/hour; falls back to the parameter file's value.
    pub q_min: Option<f64>,
    /// Wage range, $/hour.
    pub wage_bounds: (f64, f64),
    /// Fare range, $/min.
    pub fare_bounds: (f64, f64),
    /// Most idle AVs per zone; defaults to 3L².
    pub idle_cap: Option<f64>,
    /// Largest accepted equilibrium residual.
    pub feasibility_tol: f64,
    pub equilibrium: EquilibriumConfig,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            max_evals: 5000,
            step: 0.1,
            shrink: 0.5,
            min_step: 1e-4,
            regulated: false,
            q_min: None,
            wage_bounds: (1.0, 60.0),
            fare_bounds: (0.05, 5.0),
            idle_cap: None,
            feasibility_tol: 1e-6,
            equilibrium: EquilibriumConfig::default(),
        }
    }
}

impl RefineConfig {
    /// Search box matching the relaxed problem's grids.
    pub fn matching(dual: &DualConfig) -> Self {
        Self {
            wage_bounds: (dual.wage_grid.lo, dual.wage_grid.hi),
            fare_bounds: (dual.fare_grid.lo, dual.fare_grid.hi),
            idle_cap: dual.idle_cap,
            ..Self::default()
        }
    }

    pub fn wage_floor(&self, params: &BehaviorParams) -> f64 {
        if self.regulated {
            self.q_min.or(params.q_min).unwrap_or(0.0)
        } else {
            0.0
        }
    }

    fn validate(&self) -> Result<(), RefineError> {
        let ok = self.max_evals > 0
            && self.step > 0.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.min_step > 0.0
            && self.min_step <= self.step
            && self.wage_bounds.0 > 0.0
            && self.wage_bounds.0 <= self.wage_bounds.1
            && self.fare_bounds.0 > 0.0
            && self.fare_bounds.0 <= self.fare_bounds.1
            && self.feasibility_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(RefineError::Config(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("invalid refine config: {0}")]
    Config(String),
    #[error("no feasible decision found in {evaluations} evaluations; last cause: {cause}")]
    NoFeasible { evaluations: usize, cause: String },
    #[error("optimality gap undefined for upper bound {upper_bound}")]
    UndefinedGap { upper_bound: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasiblePoint {
    /// $/min.
    pub profit: f64,
    pub state: MarketState,
    pub residuals: ResidualReport,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evaluation {
    Feasible(Box<FeasiblePoint>),
    Infeasible(String),
}

impl Evaluation {
    pub fn profit(&self) -> Option<f64> {
        match self {
            Evaluation::Feasible(p) => Some(p.profit),
            Evaluation::Infeasible(_) => None,
        }
    }
}

/// Profit of `decision` at its market equilibrium, or why it has none.
/// `warm` seeds the equilibrium iteration with nearby idle humans.
pub fn evaluate_decision(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    decision: &PlatformDecision,
    config: &RefineConfig,
    warm: Option<&Array1<f64>>,
) -> Evaluation {
    if let Err(e) = decision.validate(instance.num_zones()) {
        return Evaluation::Infeasible(e.to_string());
    }
    let willing = params.willing_supply(decision.q);
    if config.regulated {
        let floor = config.wage_floor(params);
        if decision.q < floor {
            return Evaluation::Infeasible(format!("wage {} $/h below the floor {floor} $/h", decision.q));
        }
        if decision.hired_hours.unwrap_or(willing) > willing * (1.0 + 1e-12) {
            return Evaluation::Infeasible("hires more drivers than are willing to work".into());
        }
    } else if decision.hired_hours.is_some_and(|h| (h - willing).abs() > 1e-9 * willing) {
        return Evaluation::Infeasible("without a wage floor every willing driver is hired".into());
    }
    let fleet = decision.human_hours(params) + decision.idle_av.sum();
    if instance.total_potential_demand() > 0.0 && fleet <= 0.0 {
        return Evaluation::Infeasible("no vehicles to serve demand".into());
    }
    let result = equilibrium_from(instance, params, decision, &config.equilibrium, warm).or_else(|e| match warm {
        Some(_) => equilibrium_from(instance, params, decision, &config.equilibrium, None),
        None => Err(e),
    });
    let eq = match result {
        Ok(eq) => eq,
        Err(e) => return Evaluation::Infeasible(e.to_string()),
    };
    let residuals = constraint_residuals(instance, params, decision, &eq.state);
    if !(residuals.max() <= config.feasibility_tol) {
        return Evaluation::Infeasible(format!("equilibrium residual {:e}", residuals.max()));
    }
    let profit = platform_profit(instance, params, decision, &eq.state);
    Evaluation::Feasible(Box::new(FeasiblePoint { profit, state: eq.state, residuals }))
}

/// (R̄ − R)/R̄, clamped at zero. Shortfalls of R̄ beyond 1e-9 relative are
/// logged since they mean the bound was violated.
pub fn optimality_gap(profit: f64, upper_bound: f64) -> Result<f64, RefineError> {
    if !(upper_bound > 0.0) {
        return Err(RefineError::UndefinedGap { upper_bound });
    }
    let gap = (upper_bound - profit) / upper_bound;
    if gap < -1e-9 {
        warn!("profit {profit} exceeds the upper bound {upper_bound}");
    }
    Ok(gap.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub relaxed: RelaxedSolution,
    /// Relaxed upper bound R̄, $/min.
    pub upper_bound: f64,
    pub decision: PlatformDecision,
    pub state: MarketState,
    pub metrics: MarketMetrics,
    /// $/min.
    pub profit: f64,
    pub gap: f64,
    pub residuals: ResidualReport,
    pub evaluations: usize,
    pub infeasible: usize,
    pub accepted_moves: usize,
    /// Profit after each accepted move, starting with the initial point.
    pub profit_trace: Vec<f64>,
}

/// Search coordinates: wage, hired fraction (regulated only), fares, idle AVs.
struct Space {
    regulated: bool,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    scale: Vec<f64>,
}

impl Space {
    fn new(m: usize, params: &BehaviorParams, config: &RefineConfig) -> Self {
        let q_lo = config.wage_bounds.0.max(config.wage_floor(params));
        let cap = config.idle_cap.unwrap_or(3.0 * params.wait_coeff * params.wait_coeff);
        let (mut lower, mut upper, mut scale) = (vec![q_lo], vec![config.wage_bounds.1.max(q_lo)], vec![params.q0]);
        if config.regulated {
            lower.push(0.0);
            upper.push(1.0);
            scale.push(1.0);
        }
        for _ in 0..m {
            lower.push(config.fare_bounds.0);
            upper.push(config.fare_bounds.1);
            scale.push(1.0);
        }
        for _ in 0..m {
            lower.push(0.0);
            upper.push(cap);
            scale.push(50.0);
        }
        Self { regulated: config.regulated, m, lower, upper, scale }
    }

    fn offset(&self) -> usize {
        1 + usize::from(self.regulated)
    }

    fn encode(&self, d: &PlatformDecision, params: &BehaviorParams) -> Vec<f64> {
        let mut x = vec![d.q];
        if self.regulated {
            let willing = params.willing_supply(d.q);
            let frac = match d.hired_hours {
                Some(h) if willing > 0.0 => h / willing,
                _ => 1.0,
            };
            x.push(frac);
        }
        x.extend(d.r.iter());
        x.extend(d.idle_av.iter());
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
        x
    }

    fn decode(&self, x: &[f64], params: &BehaviorParams) -> PlatformDecision {
        let o = self.offset();
        let mut d = PlatformDecision::new(
            x[0],
            Array1::from(x[o..o + self.m].to_vec()),
            Array1::from(x[o + self.m..o + 2 * self.m].to_vec()),
        );
        if self.regulated {
            d.hired_hours = Some(x[1] * params.willing_supply(x[0]));
        }
        d
    }
}

struct Incumbent {
    x: Vec<f64>,
    point: FeasiblePoint,
}

/// Coordinate pattern search from the relaxed solution. Each cycle tries
/// ± the current step on every coordinate in order (wage, hired fraction,
/// fares, idle AVs), moving on the first strict improvement; a cycle with no
/// improvement shrinks the step.
pub fn refine(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    relaxed: &RelaxedSolution,
    config: &RefineConfig,
) -> Result<SolveReport, RefineError> {
    let mut start = PlatformDecision::new(relaxed.q, seed_fares(relaxed), relaxed.idle_av.clone());
    if config.regulated {
        start.hired_hours = Some(relaxed.hired);
    }
    refine_from(instance, params, relaxed, &start, config)
}

/// Relaxed fares, except that zones the relaxed solution leaves without
/// vehicles (whose fare is an arbitrary tie) start at the mean served fare.
fn seed_fares(relaxed: &RelaxedSolution) -> Array1<f64> {
    let served: Vec<usize> = (0..relaxed.r.len())
        .filter(|&i| relaxed.idle_av[i] + relaxed.idle_h[i] > 0.0)
        .collect();
    if served.is_empty() {
        return relaxed.r.clone();
    }
    let mean = served.iter().map(|&i| relaxed.r[i]).sum::<f64>() / served.len() as f64;
    Array1::from_iter((0..relaxed.r.len()).map(|i| if served.contains(&i) { relaxed.r[i] } else { mean }))
}

/// [`refine`] from an explicit starting decision.
pub fn refine_from(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    relaxed: &RelaxedSolution,
    start: &PlatformDecision,
    config: &RefineConfig,
) -> Result<SolveReport, RefineError> {
    config.validate()?;
    let space = Space::new(instance.num_zones(), params, config);
    let mut evaluations = 0;
    let mut infeasible = 0;
    let mut last_cause = String::new();
    let mut eval = |x: &[f64], warm: Option<&Array1<f64>>, evaluations: &mut usize| {
        *evaluations += 1;
        match evaluate_decision(instance, params, &space.decode(x, params), config, warm) {
            Evaluation::Feasible(p) => Some(*p),
            Evaluation::Infeasible(cause) => {
                infeasible += 1;
                last_cause = cause;
                None
            }
        }
    };

    let mut best = None;
    for x in starting_points(&space, start, params) {
        if evaluations >= config.max_evals {
            break;
        }
        if let Some(point) = eval(&x, None, &mut evaluations) {
            best = Some(Incumbent { x, point });
            break;
        }
    }
    let Some(mut best) = best else {
        return Err(RefineError::NoFeasible { evaluations, cause: last_cause });
    };

    let mut trace = vec![best.point.profit];
    let mut h = config.step;
    let mut accepted = 0;
    'search: while h >= config.min_step {
        let mut improved = false;
        for k in 0..best.x.len() {
            for sign in [1.0, -1.0] {
                if evaluations >= config.max_evals {
                    break 'search;
                }
                let mut x = best.x.clone();
                x[k] = (x[k] + sign * h * space.scale[k]).clamp(space.lower[k], space.upper[k]);
                if x[k] == best.x[k] {
                    continue;
                }
                let warm = best.point.state.idle_h.clone();
                if let Some(point) = eval(&x, Some(&warm), &mut evaluations) {
                    if point.profit > best.point.profit + 1e-9 * best.point.profit.abs() {
                        best = Incumbent { x, point };
                        trace.push(best.point.profit);
                        accepted += 1;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            h *= config.shrink;
        }
    }

    let decision = space.decode(&best.x, params);
    let profit = best.point.profit;
    let gap = optimality_gap(profit, relaxed.upper_bound).unwrap_or(f64::NAN);
    let metrics = welfare(instance, params, &decision, &best.point.state);
    Ok(SolveReport {
        relaxed: relaxed.clone(),
        upper_bound: relaxed.upper_bound,
        decision,
        state: best.point.state,
        metrics,
        profit,
        gap,
        residuals: best.point.residuals,
        evaluations,
        infeasible,
        accepted_moves: accepted,
        profit_trace: trace,
    })
}

/// The start itself, then blends toward a decision paying the outside wage
/// at a moderate fare, for starts without an equilibrium.
fn starting_points(space: &Space, start: &PlatformDecision, params: &BehaviorParams) -> Vec<Vec<f64>> {
    let x0 = space.encode(start, params);
    let mut safe = start.clone();
    safe.q = start.q.max(params.q0);
    safe.r.fill(1.0);
    safe.hired_hours = None;
    let xs = space.encode(&safe, params);
    let mut points = vec![x0.clone()];
    for w in [0.25, 0.5, 0.75, 1.0] {
        points.push(x0.iter().zip(&xs).map(|(a, b)| (1.0 - w) * a + w * b).collect());
    }
    points
}
