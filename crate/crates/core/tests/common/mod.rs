//! Instance builders and brute-force oracles shared by the integration tests
//! and the acceptance runner.

#![allow(dead_code)]

use mixfleet::dual::{zone_lagrangian, DualConfig, GridSpec};
use mixfleet::model::accounting::{
    commission_from_wage, flow_balance_residuals, human_reposition_flow, idle_shares, idle_split_accounting,
    trip_stats, vehicle_wait,
};
use mixfleet::model::{
    demand_rate, generalized_cost, passenger_wait, reposition_probs, BehaviorParams, NetworkInstance,
    PlatformDecision, Zone, ZoneLabel,
};
use ndarray::{Array1, Array2};
use rand::Rng;

pub fn zones(m: usize) -> Vec<Zone> {
    (0..m)
        .map(|k| Zone {
            id: k as u32 + 1,
            postal_code: None,
            label: if k % 2 == 0 { ZoneLabel::Urban } else { ZoneLabel::Remote },
        })
        .collect()
}

/// Small random city with trips of 5-20 min and a few passengers per minute
/// per OD pair.
pub fn random_instance(rng: &mut impl Rng, m: usize) -> NetworkInstance {
    let t = Array2::from_shape_fn((m, m), |_| rng.gen_range(5.0..20.0));
    let l0 = Array2::from_shape_fn((m, m), |_| rng.gen_range(0.5..4.0));
    let c0 = Array2::from_shape_fn((m, m), |(i, j)| 5.0 + 0.8 * t[[i, j]] + rng.gen_range(0.0..10.0));
    NetworkInstance::new(zones(m), t, l0, c0).unwrap()
}

/// Driver pool sized to small instances.
pub fn small_params() -> BehaviorParams {
    BehaviorParams { driver_pool: 400.0, ..BehaviorParams::san_francisco() }
}

pub fn random_decision(rng: &mut impl Rng, m: usize, idle_av_max: f64) -> PlatformDecision {
    PlatformDecision::new(
        rng.gen_range(22.0..40.0),
        Array1::from_iter((0..m).map(|_| rng.gen_range(0.6..1.6))),
        Array1::from_iter((0..m).map(|_| rng.gen_range(0.0..idle_av_max))),
    )
}

/// Human idle drivers of a single-zone market from the hour budget alone,
/// x + share(x)·Σ_j λ_j(x)(t_j + w(x)) = N₀F_d(q), by plain bisection.
pub fn single_zone_idle_oracle(inst: &NetworkInstance, params: &BehaviorParams, d: &PlatformDecision) -> f64 {
    assert_eq!(inst.num_zones(), 1);
    let budget = d.human_hours(params);
    let (t, l0, c0) = (inst.travel_time()[[0, 0]], inst.potential_demand()[[0, 0]], inst.outside_cost()[[0, 0]]);
    let na = d.idle_av[0];
    let used = |x: f64| {
        if x + na <= 0.0 {
            return x;
        }
        let w = params.wait_coeff / (x + na).sqrt();
        let lam = demand_rate(l0, generalized_cost(params.alpha, w, d.r[0], t), c0, params.eps);
        x + x / (x + na) * lam * (t + w)
    };
    let (mut lo, mut hi) = (0.0, budget);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if used(mid) < budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest relative residual of human flow balance and the human-hour budget
/// at idle humans `x`, built from the elementary formulas.
pub fn human_residual(inst: &NetworkInstance, params: &BehaviorParams, d: &PlatformDecision, x: &Array1<f64>) -> f64 {
    let m = inst.num_zones();
    let t = inst.travel_time();
    let budget = d.human_hours(params);
    let idle = &d.idle_av + x;
    if idle.iter().any(|n| *n <= 0.0) {
        return f64::INFINITY;
    }
    let w_p = idle.mapv(|n| passenger_wait(params.wait_coeff, n).unwrap());
    let lambda = Array2::from_shape_fn((m, m), |(i, j)| {
        let c = generalized_cost(params.alpha, w_p[i], d.r[i], t[[i, j]]);
        demand_rate(inst.potential_demand()[[i, j]], c, inst.outside_cost()[[i, j]], params.eps)
    });
    let delta = commission_from_wage(d.q, budget, &lambda, &d.r, t).map(|c| c.delta).unwrap_or(0.0);
    let stats = trip_stats(&lambda, t, &d.r, delta);
    let w_d = vehicle_wait(&idle, &lambda);
    let p = reposition_probs(&stats.ebar, &stats.tbar, w_d.as_slice().unwrap(), t, params.eta);
    let f_h = human_reposition_flow(&p, &lambda, x, &d.idle_av).unwrap();
    let shares = idle_shares(x, &d.idle_av);
    let bal = flow_balance_residuals(&lambda, &shares, &Array2::zeros((m, m)), &f_h);
    let pickups: f64 = (0..m).map(|i| shares[i].1 * lambda.row(i).sum()).sum();
    let balance = bal.human.iter().map(|v| v.abs()).fold(0.0, f64::max) / pickups.max(1e-300);
    let hours = idle_split_accounting(&lambda, t, &w_p, x, &d.idle_av).n_h();
    balance.max((hours - budget).abs() / budget)
}

/// Two-zone equilibrium by exhaustive search of [0, budget]² at spacing
/// `resolution`·budget for the smallest human residual.
pub fn two_zone_equilibrium_oracle(
    inst: &NetworkInstance,
    params: &BehaviorParams,
    d: &PlatformDecision,
    resolution: f64,
) -> (Array1<f64>, f64) {
    assert_eq!(inst.num_zones(), 2);
    let budget = d.human_hours(params);
    let n = (1.0 / resolution).round() as usize;
    let h = budget / n as f64;
    let mut best = (Array1::zeros(2), f64::INFINITY);
    for a in 0..=n {
        for b in 0..=n - a {
            let x = Array1::from(vec![a as f64 * h, b as f64 * h]);
            let r = human_residual(inst, params, d, &x);
            if r < best.1 {
                best = (x, r);
            }
        }
    }
    best
}

/// Cheapest transport of `supply` (net outflow per node, summing to zero)
/// over three nodes, by enumerating every basis of at most two arcs.
pub fn three_node_transport_oracle(supply: &[f64; 3], cost: &Array2<f64>) -> f64 {
    let arcs: Vec<(usize, usize)> = (0..3).flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let feasible = |flow: &[(usize, usize, f64)]| {
        (0..3).all(|k| {
            let net: f64 = flow.iter().map(|&(i, j, f)| if i == k { f } else if j == k { -f } else { 0.0 }).sum();
            (net - supply[k]).abs() <= 1e-9 * (1.0 + supply.iter().map(|s| s.abs()).sum::<f64>())
        })
    };
    let price = |flow: &[(usize, usize, f64)]| flow.iter().map(|&(i, j, f)| f * cost[[i, j]]).sum::<f64>();
    let mut best = if supply.iter().all(|s| s.abs() < 1e-15) { 0.0 } else { f64::INFINITY };
    for a in 0..arcs.len() {
        // single arc: its flow is the source's supply
        let (i, j) = arcs[a];
        let f = supply[i];
        if f >= 0.0 && feasible(&[(i, j, f)]) {
            best = f64::min(best, price(&[(i, j, f)]));
        }
        for &(k, l) in &arcs[a + 1..] {
            // solve the two net-flow equations at nodes i and k (or j)
            for node in 0..3 {
                let coef = |(p, q): (usize, usize)| if p == node { 1.0 } else if q == node { -1.0 } else { 0.0 };
                let other = (node + 1) % 3;
                let coef2 = |(p, q): (usize, usize)| if p == other { 1.0 } else if q == other { -1.0 } else { 0.0 };
                let (a11, a12, a21, a22) = (coef((i, j)), coef((k, l)), coef2((i, j)), coef2((k, l)));
                let det: f64 = a11 * a22 - a12 * a21;
                if det.abs() < 1e-12 {
                    continue;
                }
                let f1 = (supply[node] * a22 - a12 * supply[other]) / det;
                let f2 = (a11 * supply[other] - a21 * supply[node]) / det;
                let flow = [(i, j, f1), (k, l, f2)];
                if f1 >= -1e-12 && f2 >= -1e-12 && feasible(&flow) {
                    best = f64::min(best, price(&flow));
                }
            }
        }
    }
    best
}

/// Best (fare, idle AVs, idle humans) of zone `i`'s Lagrangian term over an
/// exhaustive `n`³ grid on the dual config's ranges.
pub fn zone_grid_oracle(
    inst: &NetworkInstance,
    params: &BehaviorParams,
    i: usize,
    mu: f64,
    config: &DualConfig,
    n: usize,
) -> (f64, f64, f64, f64) {
    let fares = GridSpec::new(config.fare_grid.lo, config.fare_grid.hi, n);
    let idle = GridSpec::new(0.0, config.idle_cap(params), n);
    let mut best = (0.0, 0.0, 0.0, f64::NEG_INFINITY);
    for r in fares.values() {
        for a in idle.values() {
            for h in idle.values() {
                let v = zone_lagrangian(inst, params, i, mu, r, a, h);
                if v > best.3 {
                    best = (r, a, h, v);
                }
            }
        }
    }
    best
}

/// Wage q with willing supply `hours`, inverting the logit supply; `None`
/// when no finite wage supplies that many.
pub fn wage_for_supply(params: &BehaviorParams, hours: f64) -> Option<f64> {
    let p = hours / params.driver_pool;
    (p > 0.0 && p < 1.0).then(|| params.q0 + (p / (1.0 - p)).ln() / params.sigma)
}

/// Relaxed single-zone profit maximized by brute force: every (fare, idle
/// AVs, idle humans) on an `n`³ grid, with the wage set so the willing supply
/// equals the human hours used.
pub fn single_zone_relaxed_oracle(inst: &NetworkInstance, params: &BehaviorParams, config: &DualConfig, n: usize) -> f64 {
    assert_eq!(inst.num_zones(), 1);
    let fares = GridSpec::new(config.fare_grid.lo, config.fare_grid.hi, n);
    let idle = GridSpec::new(0.0, config.idle_cap(params), n);
    let (q_lo, q_hi) = (config.wage_grid.lo, config.wage_grid.hi);
    let mut best = f64::NEG_INFINITY;
    for r in fares.values() {
        for a in idle.values() {
            for h in idle.values() {
                let at_zero = zone_lagrangian(inst, params, 0, 0.0, r, a, h);
                let hours = at_zero - zone_lagrangian(inst, params, 0, 1.0, r, a, h);
                let Some(q) = wage_for_supply(params, hours) else { continue };
                if q < q_lo || q > q_hi {
                    continue;
                }
                best = best.max(at_zero - q / 60.0 * hours);
            }
        }
    }
    best
}
