use serde::{Deserialize, Serialize};

use super::units::hourly_to_per_minute;
use super::ModelError;

/// Scalar behavioural parameters of passengers, drivers and the platform.
///
/// `q0`, `av_cost` and `q_min` are $/hour; everything else is in the units
/// the model formulas consume directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorParams {
    /// Passenger value of time, $/min.
    pub alpha: f64,
    /// Mode-choice logit sensitivity, 1/$.
    pub eps: f64,
    /// Labour-supply logit sensitivity, hour/$.
    pub sigma: f64,
    /// Repositioning logit sensitivity on earning rates in $/min.
    pub eta: f64,
    /// Square-root-law waiting coefficient.
    #[serde(rename = "L")]
    pub wait_coeff: f64,
    /// Pool of potential drivers.
    #[serde(rename = "N0")]
    pub driver_pool: f64,
    /// Drivers' outside-option wage, $/hour.
    pub q0: f64,
    /// AV cost, $/hour.
    #[serde(rename = "D")]
    pub av_cost: f64,
    /// Wage floor, $/hour.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_min: Option<f64>,
}

impl BehaviorParams {
    /// Calibrated San Francisco values with D = 26 $/h and no wage floor.
    pub fn san_francisco() -> Self {
        Self {
            alpha: 3.0,
            eps: 0.12,
            sigma: 0.17,
            eta: 0.1,
            wait_coeff: 43.0,
            driver_pool: 10_000.0,
            q0: 29.34,
            av_cost: 26.0,
            q_min: None,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("alpha", self.alpha),
            ("eps", self.eps),
            ("sigma", self.sigma),
            ("eta", self.eta),
            ("L", self.wait_coeff),
            ("N0", self.driver_pool),
            ("q0", self.q0),
            ("D", self.av_cost),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        if let Some(q) = self.q_min {
            if !(q.is_finite() && q >= 0.0) {
                return Err(ModelError::InvalidParameter {
                    name: "q_min",
                    value: q,
                    reason: "must be finite and non-negative",
                });
            }
        }
        Ok(())
    }

    pub fn av_cost_per_minute(&self) -> f64 {
        hourly_to_per_minute(self.av_cost)
    }

    pub fn with_av_cost(mut self, d: f64) -> Self {
        self.av_cost = d;
        self
    }

    pub fn with_wage_floor(mut self, q_min: Option<f64>) -> Self {
        self.q_min = q_min;
        self
    }

    /// Willing human supply N₀F_d(q) at an hourly wage.
    pub fn willing_supply(&self, q_hourly: f64) -> f64 {
        super::choice::driver_supply(self.driver_pool, q_hourly, self.q0, self.sigma)
    }
}
