use serde::{Deserialize, Serialize};

use super::grid::{maximize_2d, GridSpec};
use super::DualConfig;
use crate::model::{BehaviorParams, NetworkInstance};

/// Maximizer of one zone's Lagrangian term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneOptimum {
    pub r: f64,
    pub idle_av: f64,
    pub idle_h: f64,
    pub value: f64,
    /// Human vehicle-hours this choice consumes.
    pub human_hours: f64,
    pub av_hours: f64,
}

/// Outbound demand data of one zone, with λ_ij written as
/// λ⁰_ij / (1 + e^{ε(r t_ij − c⁰_ij)} · e^{εαw}).
#[derive(Debug, Clone)]
pub(crate) struct ZoneObjective {
    lambda0: Vec<f64>,
    travel: Vec<f64>,
    outside: Vec<f64>,
    eps: f64,
    wait_coeff: f64,
    wait_scale: f64,
}

/// Demand aggregates of a zone at one (fare, idle) point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Served {
    /// Σ_j λ_ij t_ij
    pub trip_minutes: f64,
    /// Σ_j λ_ij (t_ij + w)
    pub busy_hours: f64,
}

impl ZoneObjective {
    pub fn new(instance: &NetworkInstance, params: &BehaviorParams, i: usize) -> Self {
        let mut z = Self {
            lambda0: Vec::new(),
            travel: Vec::new(),
            outside: Vec::new(),
            eps: params.eps,
            wait_coeff: params.wait_coeff,
            wait_scale: params.eps * params.alpha * params.wait_coeff,
        };
        for j in 0..instance.num_zones() {
            let l0 = instance.potential_demand()[[i, j]];
            if l0 > 0.0 {
                z.lambda0.push(l0);
                z.travel.push(instance.travel_time()[[i, j]]);
                z.outside.push(instance.outside_cost()[[i, j]]);
            }
        }
        z
    }

    pub fn fare_odds(&self, r: f64) -> Vec<f64> {
        self.travel
            .iter()
            .zip(&self.outside)
            .map(|(t, c0)| (self.eps * (r * t - c0)).exp())
            .collect()
    }

    pub fn served(&self, odds: &[f64], idle: f64) -> Served {
        if idle <= 0.0 {
            return Served { trip_minutes: 0.0, busy_hours: 0.0 };
        }
        let root = idle.sqrt();
        let x = (self.wait_scale / root).exp();
        let w = self.wait_coeff / root;
        let (mut tm, mut demand) = (0.0, 0.0);
        for ((l0, t), e) in self.lambda0.iter().zip(&self.travel).zip(odds) {
            let lam = l0 / (1.0 + e * x);
            demand += lam;
            tm += lam * t;
        }
        Served { trip_minutes: tm, busy_hours: tm + w * demand }
    }
}

/// Zone `i`'s Lagrangian term at fare `r`, idle AVs `idle_av` and idle humans
/// `idle_h`: fare revenue minus AV hours at the AV cost and human hours at
/// the multiplier `mu` ($/min per vehicle). Hours follow the idle split.
pub fn zone_lagrangian(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    i: usize,
    mu: f64,
    r: f64,
    idle_av: f64,
    idle_h: f64,
) -> f64 {
    let z = ZoneObjective::new(instance, params, i);
    let (value, _, _) = split_value(&z, params.av_cost_per_minute(), mu, r, idle_av, idle_h);
    value
}

fn split_value(z: &ZoneObjective, d: f64, mu: f64, r: f64, idle_av: f64, idle_h: f64) -> (f64, f64, f64) {
    let n = idle_av + idle_h;
    if n <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = z.served(&z.fare_odds(r), n);
    let av_hours = idle_av / n * s.busy_hours + idle_av;
    let human_hours = idle_h / n * s.busy_hours + idle_h;
    (r * s.trip_minutes - d * av_hours - mu * human_hours, av_hours, human_hours)
}

/// Grid-optimal fare and idle fleet of zone `i` at multiplier `mu`.
///
/// At a fixed idle total the term is linear in the AV/human mix, so the
/// optimum puts every idle vehicle in the cheaper fleet (AVs on a tie) and
/// the search runs over (fare, idle total) only.
pub fn zone_subproblem(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    i: usize,
    mu: f64,
    config: &DualConfig,
) -> ZoneOptimum {
    let z = ZoneObjective::new(instance, params, i);
    let d = params.av_cost_per_minute();
    let all_av = d <= mu;
    let cost = if all_av { d } else { mu };
    // the idle axis is laid out in √n, matching the square-root wait law and
    // resolving small fleets, where thin zones have their only profitable basin
    let root_idle = GridSpec::new(0.0, config.idle_cap(params).sqrt(), config.idle_points);
    let (r, u, _) = maximize_2d(
        config.fare_grid,
        root_idle,
        config.zoom_passes,
        config.zoom_factor,
        |r| (r, z.fare_odds(r)),
        |(r, odds), u| {
            let n = u * u;
            let s = z.served(odds, n);
            r * s.trip_minutes - cost * (s.busy_hours + n)
        },
    );
    let n = u * u;
    let (idle_av, idle_h) = if all_av { (n, 0.0) } else { (0.0, n) };
    let (value, av_hours, human_hours) = split_value(&z, d, mu, r, idle_av, idle_h);
    ZoneOptimum { r, idle_av, idle_h, value, human_hours, av_hours }
}
