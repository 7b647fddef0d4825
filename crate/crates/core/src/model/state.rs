use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::accounting::{self, FleetHours};

/// Full endogenous market equilibrium induced by a platform decision.
///
/// Waits are infinite where undefined: `w_p` in zones without idle vehicles
/// and `w_d` in zones without outbound demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    /// Realized demand λ_ij, passengers/min.
    pub lambda: Array2<f64>,
    /// Passenger wait per origin, min.
    pub w_p: Array1<f64>,
    /// Vehicle wait between rides per zone, min.
    pub w_d: Array1<f64>,
    pub idle_av: Array1<f64>,
    pub idle_h: Array1<f64>,
    pub idle_total: Array1<f64>,
    /// Human repositioning flow, including the stay-put diagonal.
    pub f_h: Array2<f64>,
    /// AV repositioning flow, zero diagonal.
    pub f_a: Array2<f64>,
    /// AV vehicle-hours (fleet size).
    pub n_a: f64,
    /// Human vehicle-hours (fleet size).
    pub n_h: f64,
    /// Commission rate implied by the wage.
    pub delta: f64,
    pub tbar: Vec<Option<f64>>,
    pub ebar: Vec<Option<f64>>,
    /// Human repositioning probabilities.
    pub p: Array2<f64>,
}

impl MarketState {
    pub fn num_zones(&self) -> usize {
        self.idle_total.len()
    }

    /// (AV share, human share) of idle vehicles per zone.
    pub fn shares(&self) -> Vec<(f64, f64)> {
        accounting::idle_shares(&self.idle_h, &self.idle_av)
    }

    pub fn total_demand(&self) -> f64 {
        self.lambda.sum()
    }

    pub fn revenue(&self, r: &Array1<f64>, t: &Array2<f64>) -> f64 {
        accounting::fare_revenue(&self.lambda, r, t)
    }

    pub fn fleet_hours(&self, t: &Array2<f64>) -> FleetHours {
        accounting::idle_split_accounting(&self.lambda, t, &self.w_p, &self.idle_h, &self.idle_av)
    }

    /// Human share of all vehicles serving zone i, over its idle pool.
    pub fn human_share(&self, i: usize) -> Option<f64> {
        let n = self.idle_total[i];
        (n > 0.0).then(|| self.idle_h[i] / n)
    }
}
