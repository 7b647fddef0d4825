//! Little's-law bookkeeping: revenue, commission, trip statistics, vehicle
//! hours by status, repositioning flows and flow-balance residuals.

use ndarray::{Array1, Array2};

use super::units::hourly_to_per_minute;
use super::ModelError;

/// Total fare revenue Σ r_i λ_ij t_ij, $/min.
pub fn fare_revenue(lambda: &Array2<f64>, r: &Array1<f64>, t: &Array2<f64>) -> f64 {
    lambda
        .rows()
        .into_iter()
        .zip(t.rows())
        .zip(r.iter())
        .map(|((l, tt), ri)| ri * l.dot(&tt))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Commission {
    pub delta: f64,
    /// Wage bill above fare revenue, i.e. a negative commission.
    pub wage_exceeds_revenue: bool,
}

/// Commission rate implied by paying `n_h` vehicle-hours at hourly wage `q`.
pub fn commission_for_revenue(q: f64, n_h: f64, revenue: f64) -> Result<Commission, ModelError> {
    if !(revenue > 0.0) {
        return Err(ModelError::UndefinedCommission);
    }
    let delta = 1.0 - hourly_to_per_minute(q) * n_h / revenue;
    Ok(Commission {
        delta,
        wage_exceeds_revenue: delta < 0.0,
    })
}

pub fn commission_from_wage(
    q: f64,
    n_h: f64,
    lambda: &Array2<f64>,
    r: &Array1<f64>,
    t: &Array2<f64>,
) -> Result<Commission, ModelError> {
    commission_for_revenue(q, n_h, fare_revenue(lambda, r, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripStats {
    /// Mean trip time out of each zone; `None` without outbound demand.
    pub tbar: Vec<Option<f64>>,
    /// Mean driver earning per trip out of each zone.
    pub ebar: Vec<Option<f64>>,
}

pub fn trip_stats(lambda: &Array2<f64>, t: &Array2<f64>, r: &Array1<f64>, delta: f64) -> TripStats {
    let m = r.len();
    let mut tbar = Vec::with_capacity(m);
    let mut ebar = Vec::with_capacity(m);
    for i in 0..m {
        let out = lambda.row(i).sum();
        if out > 0.0 {
            let tb = lambda.row(i).dot(&t.row(i)) / out;
            tbar.push(Some(tb));
            ebar.push(Some((1.0 - delta) * r[i] * tb));
        } else {
            tbar.push(None);
            ebar.push(None);
        }
    }
    TripStats { tbar, ebar }
}

/// Fraction of idle vehicles in each zone that are (AV, human). Empty zones
/// get (0, 0).
pub fn idle_shares(idle_h: &Array1<f64>, idle_av: &Array1<f64>) -> Vec<(f64, f64)> {
    idle_h
        .iter()
        .zip(idle_av.iter())
        .map(|(h, a)| {
            let n = h + a;
            if n > 0.0 {
                (a / n, h / n)
            } else {
                (0.0, 0.0)
            }
        })
        .collect()
}

/// Human drivers completing trips into each zone per minute, Σ_k λ_ki·s_k
/// with s_k the human share of origin k.
pub fn human_dropoffs(
    lambda: &Array2<f64>,
    idle_h: &Array1<f64>,
    idle_av: &Array1<f64>,
) -> Result<Array1<f64>, ModelError> {
    let m = idle_h.len();
    let shares = idle_shares(idle_h, idle_av);
    let mut inflow = Array1::zeros(m);
    for k in 0..m {
        let row = lambda.row(k);
        if idle_h[k] + idle_av[k] <= 0.0 {
            if row.iter().any(|v| *v > 0.0) {
                return Err(ModelError::SplitUndefined { zone: k });
            }
            continue;
        }
        let s = shares[k].1;
        if s == 0.0 {
            continue;
        }
        for (i, l) in row.iter().enumerate() {
            inflow[i] += s * l;
        }
    }
    Ok(inflow)
}

/// f_ij,H = ℙ_ij × (human drop-offs in zone i).
pub fn human_reposition_flow(
    p: &Array2<f64>,
    lambda: &Array2<f64>,
    idle_h: &Array1<f64>,
    idle_av: &Array1<f64>,
) -> Result<Array2<f64>, ModelError> {
    let inflow = human_dropoffs(lambda, idle_h, idle_av)?;
    let mut f = p.clone();
    for (mut row, d) in f.rows_mut().into_iter().zip(inflow.iter()) {
        row.mapv_inplace(|x| x * d);
    }
    Ok(f)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StatusHours {
    pub in_service: f64,
    pub pickup: f64,
    pub idle: f64,
}

impl StatusHours {
    pub fn total(&self) -> f64 {
        self.in_service + self.pickup + self.idle
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FleetHours {
    pub av: StatusHours,
    pub human: StatusHours,
}

impl FleetHours {
    pub fn n_a(&self) -> f64 {
        self.av.total()
    }

    pub fn n_h(&self) -> f64 {
        self.human.total()
    }
}

/// Vehicle-hours of each fleet split into carrying, picking up and idle.
pub fn idle_split_accounting(
    lambda: &Array2<f64>,
    t: &Array2<f64>,
    w_p: &Array1<f64>,
    idle_h: &Array1<f64>,
    idle_av: &Array1<f64>,
) -> FleetHours {
    let shares = idle_shares(idle_h, idle_av);
    let mut hours = FleetHours::default();
    for (i, (s_a, s_h)) in shares.into_iter().enumerate() {
        let mut busy = 0.0;
        let mut pickup = 0.0;
        for j in 0..lambda.ncols() {
            let l = lambda[[i, j]];
            if l > 0.0 {
                busy += l * t[[i, j]];
                pickup += l * w_p[i];
            }
        }
        hours.av.in_service += s_a * busy;
        hours.av.pickup += s_a * pickup;
        hours.human.in_service += s_h * busy;
        hours.human.pickup += s_h * pickup;
        hours.av.idle += idle_av[i];
        hours.human.idle += idle_h[i];
    }
    hours
}

/// Average vehicle wait between rides from N_i^I = w_i^d Σ_j λ_ij.
/// Infinite where there is no outbound demand.
pub fn vehicle_wait(idle_total: &Array1<f64>, lambda: &Array2<f64>) -> Array1<f64> {
    Array1::from_iter(idle_total.iter().enumerate().map(|(i, n)| {
        let out = lambda.row(i).sum();
        if out > 0.0 {
            n / out
        } else {
            f64::INFINITY
        }
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceResiduals {
    pub av: Array1<f64>,
    pub human: Array1<f64>,
}

/// Inflow minus outflow of each vehicle class in every zone.
///
/// Occupied vehicles arriving in zone i from j carry the class mix of their
/// origin j; departures from i carry the mix of i. Repositioning flows are
/// added on both sides (including any stay-in-zone diagonal, which cancels).
pub fn flow_balance_residuals(
    lambda: &Array2<f64>,
    shares: &[(f64, f64)],
    f_a: &Array2<f64>,
    f_h: &Array2<f64>,
) -> BalanceResiduals {
    let m = shares.len();
    let mut av = Array1::zeros(m);
    let mut human = Array1::zeros(m);
    for i in 0..m {
        let (mut in_a, mut in_h, mut out_a, mut out_h) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..m {
            in_a += shares[j].0 * lambda[[j, i]] + f_a[[j, i]];
            in_h += shares[j].1 * lambda[[j, i]] + f_h[[j, i]];
            out_a += shares[i].0 * lambda[[i, j]] + f_a[[i, j]];
            out_h += shares[i].1 * lambda[[i, j]] + f_h[[i, j]];
        }
        av[i] = in_a - out_a;
        human[i] = in_h - out_h;
    }
    BalanceResiduals { av, human }
}

/// Per-zone net AV surplus (drop-offs minus pickups) that repositioning must
/// carry away.
pub fn av_imbalance(lambda: &Array2<f64>, shares: &[(f64, f64)]) -> Array1<f64> {
    let m = shares.len();
    Array1::from_iter((0..m).map(|i| {
        let mut drop = 0.0;
        let mut pick = 0.0;
        for j in 0..m {
            drop += shares[j].0 * lambda[[j, i]];
            pick += shares[i].0 * lambda[[i, j]];
        }
        drop - pick
    }))
}

/// Profit in $/min: fare revenue minus AV cost minus the wage bill on the
/// human vehicle-hours paid for. Hourly rates are converted here.
pub fn profit_per_minute(revenue: f64, n_a: f64, av_cost: f64, paid_hours: f64, q: f64) -> f64 {
    revenue - hourly_to_per_minute(av_cost) * n_a - hourly_to_per_minute(q) * paid_hours
}
