use super::EquilibriumError;
use crate::model::{BehaviorParams, NetworkInstance, PlatformDecision};

/// Outbound human pickups of one zone as a function of its idle human count:
/// x/(a+x)·Σ_j λ⁰_ij F_p(α L/√(a+x) + r t_ij).
///
/// The logit term is rewritten as 1/(1 + E_ij·e^{εαw}) with E_ij fixed by the
/// fare, so one evaluation costs a single exponential.
#[derive(Debug, Clone)]
pub struct ZoneResponse {
    idle_av: f64,
    wait_coeff: f64,
    wait_scale: f64,
    lambda0: Vec<f64>,
    fare_odds: Vec<f64>,
    travel: Vec<f64>,
}

impl ZoneResponse {
    pub fn new(instance: &NetworkInstance, params: &BehaviorParams, decision: &PlatformDecision, i: usize) -> Self {
        let l0 = instance.potential_demand().row(i);
        let t = instance.travel_time().row(i);
        let c0 = instance.outside_cost().row(i);
        let mut lambda0 = Vec::new();
        let mut fare_odds = Vec::new();
        let mut travel = Vec::new();
        for j in 0..l0.len() {
            if l0[j] > 0.0 {
                lambda0.push(l0[j]);
                fare_odds.push((params.eps * (decision.r[i] * t[j] - c0[j])).exp());
                travel.push(t[j]);
            }
        }
        Self {
            idle_av: decision.idle_av[i],
            wait_coeff: params.wait_coeff,
            wait_scale: params.eps * params.alpha * params.wait_coeff,
            lambda0,
            fare_odds,
            travel,
        }
    }

    /// e^{εαw} at `idle` total idle vehicles; infinite without vehicles.
    #[inline]
    pub fn wait_odds(&self, idle: f64) -> f64 {
        if idle > 0.0 {
            (self.wait_scale / idle.sqrt()).exp()
        } else {
            f64::INFINITY
        }
    }

    /// Realized outbound demand at `idle` total idle vehicles.
    pub fn demand_at(&self, idle: f64) -> f64 {
        let x = self.wait_odds(idle);
        if !x.is_finite() {
            return 0.0;
        }
        self.lambda0
            .iter()
            .zip(&self.fare_odds)
            .map(|(l, e)| l / (1.0 + e * x))
            .sum()
    }

    pub fn human_pickups(&self, x: f64) -> f64 {
        let n = self.idle_av + x;
        if x <= 0.0 || n <= 0.0 {
            return 0.0;
        }
        x / n * self.demand_at(n)
    }

    /// Human hours spent carrying or fetching passengers out of this zone.
    pub fn human_busy_hours(&self, x: f64) -> f64 {
        let n = self.idle_av + x;
        if x <= 0.0 || n <= 0.0 {
            return 0.0;
        }
        let odds = self.wait_odds(n);
        if !odds.is_finite() {
            return 0.0;
        }
        let w = self.wait_coeff / n.sqrt();
        let total: f64 = self
            .lambda0
            .iter()
            .zip(&self.fare_odds)
            .zip(&self.travel)
            .map(|((l, e), t)| l / (1.0 + e * odds) * (t + w))
            .sum();
        x / n * total
    }

    /// Human pickups and their derivative in x.
    fn pickups_with_slope(&self, x: f64) -> (f64, f64) {
        let n = self.idle_av + x;
        if x <= 0.0 || n <= 0.0 {
            return (0.0, f64::INFINITY);
        }
        let root = n.sqrt();
        let odds = (self.wait_scale / root).exp();
        if !odds.is_finite() {
            return (0.0, 0.0);
        }
        let (mut demand, mut slope) = (0.0, 0.0);
        for (l, e) in self.lambda0.iter().zip(&self.fare_odds) {
            let denom = 1.0 + e * odds;
            demand += l / denom;
            slope += l * e * odds / (denom * denom);
        }
        slope *= self.wait_scale / (2.0 * n * root);
        (x / n * demand, self.idle_av / (n * n) * demand + x / n * slope)
    }

    /// The x ∈ [0, cap] with human_pickups(x) = target, or `None` when the
    /// target exceeds human_pickups(cap). Pickups increase in x, so the root
    /// is unique.
    pub fn invert(&self, target: f64, cap: f64, tol: f64) -> Option<f64> {
        self.invert_near(target, cap, tol, None)
    }

    /// [`Self::invert`] by Newton steps from `guess`, falling back to
    /// bisection whenever a step leaves the bracket.
    pub fn invert_near(&self, target: f64, cap: f64, tol: f64, guess: Option<f64>) -> Option<f64> {
        if target <= 0.0 {
            return Some(0.0);
        }
        if self.human_pickups(cap) < target {
            return None;
        }
        let (mut lo, mut hi) = (0.0, cap);
        let mut x = guess.filter(|g| *g > 0.0 && *g < cap).unwrap_or(0.5 * cap);
        for _ in 0..200 {
            let (h, slope) = self.pickups_with_slope(x);
            if h < target {
                lo = x;
            } else {
                hi = x;
            }
            if (h - target).abs() <= 1e-15 * target || hi - lo <= tol {
                break;
            }
            let newton = x - (h - target) / slope;
            let next = if newton > lo && newton < hi && slope.is_finite() && slope > 0.0 {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= tol.min(1e-15 * x.abs()) {
                x = next;
                break;
            }
            x = next;
        }
        Some(x)
    }
}

/// Idle human drivers zone `i` needs so that its outbound human pickups match
/// `inbound_flow_target`, searched on [0, human hours].
pub fn solve_idle_scalar(
    instance: &NetworkInstance,
    i: usize,
    inbound_flow_target: f64,
    decision: &PlatformDecision,
    params: &BehaviorParams,
    tol: f64,
) -> Result<f64, EquilibriumError> {
    let zone = ZoneResponse::new(instance, params, decision, i);
    let cap = decision.human_hours(params);
    zone.invert(inbound_flow_target, cap, tol)
        .ok_or(EquilibriumError::InfeasibleTarget {
            zone: i,
            target: inbound_flow_target,
            supremum: zone.human_pickups(cap),
        })
}
