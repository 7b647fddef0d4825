use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::accounting::profit_per_minute;
use super::choice::{generalized_cost, softplus};
use super::units::hourly_to_per_minute;
use super::{BehaviorParams, MarketState, NetworkInstance, PlatformDecision};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneSummary {
    pub fare: f64,
    pub w_p: f64,
    pub w_d: f64,
    pub idle_av: f64,
    pub idle_h: f64,
    pub human_share: Option<f64>,
    pub demand_out: f64,
}

/// Aggregate outcomes; money in $/min, demand in passengers/min.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketMetrics {
    pub platform_profit: f64,
    pub revenue: f64,
    pub total_demand: f64,
    /// Average fare per ride, $.
    pub mean_fare: f64,
    /// Demand-weighted passenger wait, min.
    pub mean_wait: f64,
    pub passenger_surplus: f64,
    pub driver_surplus: f64,
    pub social_welfare: f64,
    pub n_a: f64,
    pub n_h: f64,
    /// Fraction of vehicle-hours spent carrying a passenger.
    pub occupancy_av: f64,
    pub occupancy_h: f64,
    pub zones: Vec<ZoneSummary>,
}

/// Logit log-sum passenger surplus, $/min.
pub fn passenger_surplus(instance: &NetworkInstance, params: &BehaviorParams, w_p: &Array1<f64>, r: &Array1<f64>) -> f64 {
    let l0 = instance.potential_demand();
    let c0 = instance.outside_cost();
    let t = instance.travel_time();
    let mut total = 0.0;
    for ((i, j), lam0) in l0.indexed_iter() {
        if *lam0 == 0.0 || !w_p[i].is_finite() {
            continue;
        }
        let c = generalized_cost(params.alpha, w_p[i], r[i], t[[i, j]]);
        total += lam0 / params.eps * softplus(-params.eps * (c - c0[[i, j]]));
    }
    total
}

/// Logit log-sum surplus of drivers who work at wage `q`, $/min. When only a
/// fraction of willing drivers is hired the surplus scales with it.
pub fn driver_surplus(params: &BehaviorParams, q: f64, hired_fraction: f64) -> f64 {
    let per_hour = params.driver_pool / params.sigma * softplus(params.sigma * (q - params.q0));
    hourly_to_per_minute(per_hour) * hired_fraction
}

pub fn welfare(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    decision: &PlatformDecision,
    state: &MarketState,
) -> MarketMetrics {
    let t = instance.travel_time();
    let revenue = state.revenue(&decision.r, t);
    let hours = state.fleet_hours(t);
    let paid = decision.human_hours(params);
    let profit = profit_per_minute(revenue, state.n_a, params.av_cost, paid, decision.q);
    let willing = params.willing_supply(decision.q);
    let hired_fraction = if willing > 0.0 { (paid / willing).min(1.0) } else { 0.0 };
    let ps = passenger_surplus(instance, params, &state.w_p, &decision.r);
    let ds = driver_surplus(params, decision.q, hired_fraction);
    let demand = state.total_demand();
    let mut wait_weighted = 0.0;
    let zones = (0..state.num_zones())
        .map(|i| {
            let out = state.lambda.row(i).sum();
            if out > 0.0 {
                wait_weighted += out * state.w_p[i];
            }
            ZoneSummary {
                fare: decision.r[i],
                w_p: state.w_p[i],
                w_d: state.w_d[i],
                idle_av: state.idle_av[i],
                idle_h: state.idle_h[i],
                human_share: state.human_share(i),
                demand_out: out,
            }
        })
        .collect();
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    MarketMetrics {
        platform_profit: profit,
        revenue,
        total_demand: demand,
        mean_fare: ratio(revenue, demand),
        mean_wait: ratio(wait_weighted, demand),
        passenger_surplus: ps,
        driver_surplus: ds,
        social_welfare: ps + ds + profit,
        n_a: state.n_a,
        n_h: state.n_h,
        occupancy_av: ratio(hours.av.in_service, hours.n_a()),
        occupancy_h: ratio(hours.human.in_service, hours.n_h()),
        zones,
    }
}
