use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::model::accounting::{self, human_dropoffs};
use crate::model::choice::{demand_rate, generalized_cost, passenger_wait, reposition_probs};
use crate::model::{BehaviorParams, MarketState, NetworkInstance, PlatformDecision};

/// Norm-wise relative residual of every equilibrium constraint, recomputed
/// from the state alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub demand: f64,
    pub idle_split: f64,
    pub vehicle_wait: f64,
    pub human_reposition: f64,
    pub human_balance: f64,
    pub av_balance: f64,
    pub human_hours: f64,
    pub av_hours: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        [
            self.demand,
            self.idle_split,
            self.vehicle_wait,
            self.human_reposition,
            self.human_balance,
            self.av_balance,
            self.human_hours,
            self.av_hours,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn named(&self) -> [(&'static str, f64); 8] {
        [
            ("demand", self.demand),
            ("idle_split", self.idle_split),
            ("vehicle_wait", self.vehicle_wait),
            ("human_reposition", self.human_reposition),
            ("human_balance", self.human_balance),
            ("av_balance", self.av_balance),
            ("human_hours", self.human_hours),
            ("av_hours", self.av_hours),
        ]
    }
}

/// max |lhs − rhs| over max(|lhs|, |rhs|), all entries pooled.
fn relative<'a>(pairs: impl Iterator<Item = (f64, f64)> + 'a) -> f64 {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (a, b) in pairs {
        if a.is_infinite() && a == b {
            continue;
        }
        worst = worst.max((a - b).abs());
        scale = scale.max(a.abs()).max(b.abs());
    }
    if worst.is_nan() {
        f64::INFINITY
    } else if scale > 0.0 {
        worst / scale
    } else {
        0.0
    }
}

fn scalar(a: f64, b: f64) -> f64 {
    relative(std::iter::once((a, b)))
}

pub fn constraint_residuals(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    decision: &PlatformDecision,
    state: &MarketState,
) -> ResidualReport {
    let m = instance.num_zones();
    let t = instance.travel_time();
    let lambda = &state.lambda;

    let idle_total = &state.idle_av + &state.idle_h;
    let idle_split = relative(state.idle_total.iter().copied().zip(idle_total.iter().copied()))
        .max(relative(state.idle_av.iter().copied().zip(decision.idle_av.iter().copied())));

    let w_p = idle_total.mapv(|n| passenger_wait(params.wait_coeff, n).unwrap_or(f64::INFINITY));
    let expected = Array2::from_shape_fn((m, m), |(i, j)| {
        let c = generalized_cost(params.alpha, w_p[i], decision.r[i], t[[i, j]]);
        demand_rate(instance.potential_demand()[[i, j]], c, instance.outside_cost()[[i, j]], params.eps)
    });
    let demand = relative(lambda.iter().copied().zip(expected.iter().copied()))
        .max(relative(state.w_p.iter().copied().zip(w_p.iter().copied())));

    let out: Array1<f64> = lambda.sum_axis(ndarray::Axis(1));
    let vehicle_wait = relative(
        (0..m)
            .filter(|i| out[*i] > 0.0)
            .map(|i| (idle_total[i], state.w_d[i] * out[i])),
    );

    let paid = decision.human_hours(params);
    let delta = accounting::commission_from_wage(decision.q, paid, lambda, &decision.r, t)
        .map(|c| c.delta)
        .unwrap_or(0.0);
    let stats = accounting::trip_stats(lambda, t, &decision.r, delta);
    let w_d = accounting::vehicle_wait(&idle_total, lambda);
    let p = reposition_probs(&stats.ebar, &stats.tbar, w_d.as_slice().unwrap(), t, params.eta);
    let human_reposition = match human_dropoffs(lambda, &state.idle_h, &state.idle_av) {
        Ok(d) => relative((0..m).flat_map(|i| {
            let p = &p;
            let d = &d;
            (0..m).map(move |j| (state.f_h[[i, j]], p[[i, j]] * d[i]))
        })),
        Err(_) => f64::INFINITY,
    };

    let shares = accounting::idle_shares(&state.idle_h, &state.idle_av);
    let (mut in_a, mut out_a, mut in_h, mut out_h) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for i in 0..m {
        for j in 0..m {
            in_a[i] += shares[j].0 * lambda[[j, i]] + state.f_a[[j, i]];
            in_h[i] += shares[j].1 * lambda[[j, i]] + state.f_h[[j, i]];
            out_a[i] += shares[i].0 * lambda[[i, j]] + state.f_a[[i, j]];
            out_h[i] += shares[i].1 * lambda[[i, j]] + state.f_h[[i, j]];
        }
    }
    let human_balance = relative(in_h.into_iter().zip(out_h));
    let av_balance = relative(in_a.into_iter().zip(out_a));

    let hours = accounting::idle_split_accounting(lambda, t, &w_p, &state.idle_h, &state.idle_av);
    let human_hours = scalar(paid, hours.n_h()).max(scalar(state.n_h, hours.n_h()));
    let av_hours = scalar(state.n_a, hours.n_a());

    ResidualReport {
        demand,
        idle_split,
        vehicle_wait,
        human_reposition,
        human_balance,
        av_balance,
        human_hours,
        av_hours,
    }
}
