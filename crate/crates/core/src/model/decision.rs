use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{BehaviorParams, ModelError};

/// The platform's controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformDecision {
    /// Human driver wage, $/hour.
    pub q: f64,
    /// Per-origin fare, $ per minute of trip time.
    pub r: Array1<f64>,
    /// Idle AVs placed in each zone.
    pub idle_av: Array1<f64>,
    /// AV repositioning flow, vehicles/min. Only set on full-problem solutions.
    #[serde(default)]
    pub av_flow: Option<Array2<f64>>,
    /// Human vehicle-hours actually hired. `None` means the whole willing
    /// supply N₀F_d(q) is hired, which is the only option without a wage floor.
    #[serde(default)]
    pub hired_hours: Option<f64>,
}

impl PlatformDecision {
    pub fn new(q: f64, r: Array1<f64>, idle_av: Array1<f64>) -> Self {
        Self {
            q,
            r,
            idle_av,
            av_flow: None,
            hired_hours: None,
        }
    }

    pub fn num_zones(&self) -> usize {
        self.r.len()
    }

    /// Human vehicle-hours the equilibrium has to absorb.
    pub fn human_hours(&self, params: &BehaviorParams) -> f64 {
        self.hired_hours
            .unwrap_or_else(|| params.willing_supply(self.q))
    }

    pub fn validate(&self, num_zones: usize) -> Result<(), ModelError> {
        if self.r.len() != num_zones || self.idle_av.len() != num_zones {
            return Err(ModelError::InvalidDecision(format!(
                "decision has {} fares and {} idle-AV entries for {num_zones} zones",
                self.r.len(),
                self.idle_av.len()
            )));
        }
        if !(self.q.is_finite() && self.q > 0.0) {
            return Err(ModelError::InvalidDecision(format!(
                "wage must be positive, got {}",
                self.q
            )));
        }
        if let Some(i) = self.r.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(ModelError::InvalidDecision(format!(
                "fare of zone index {i} must be positive, got {}",
                self.r[i]
            )));
        }
        if let Some(i) = self
            .idle_av
            .iter()
            .position(|n| !(n.is_finite() && *n >= 0.0))
        {
            return Err(ModelError::InvalidDecision(format!(
                "idle AVs of zone index {i} must be non-negative, got {}",
                self.idle_av[i]
            )));
        }
        if let Some(h) = self.hired_hours {
            if !(h.is_finite() && h >= 0.0) {
                return Err(ModelError::InvalidDecision(format!(
                    "hired hours must be non-negative, got {h}"
                )));
            }
        }
        if let Some(f) = &self.av_flow {
            if f.dim() != (num_zones, num_zones) {
                return Err(ModelError::InvalidDecision("AV flow has wrong shape".into()));
            }
            if f.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(ModelError::InvalidDecision("AV flow must be non-negative".into()));
            }
            if (0..num_zones).any(|i| f[[i, i]] != 0.0) {
                return Err(ModelError::InvalidDecision(
                    "AV flow must have a zero diagonal".into(),
                ));
            }
        }
        Ok(())
    }
}
