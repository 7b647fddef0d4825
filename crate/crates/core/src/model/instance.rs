use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZoneLabel {
    Urban,
    Remote,
}

impl ZoneLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ZoneLabel::Urban => "urban",
            ZoneLabel::Remote => "remote",
        }
    }
}

impl std::str::FromStr for ZoneLabel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "urban" => Ok(ZoneLabel::Urban),
            "remote" => Ok(ZoneLabel::Remote),
            other => Err(ModelError::InvalidInstance(format!(
                "unknown zone label `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zone {
    pub id: u32,
    pub postal_code: Option<String>,
    pub label: ZoneLabel,
}

/// Zones plus the three exogenous origin-destination matrices.
///
/// Travel times are in minutes, potential demand in passengers per minute and
/// outside-option costs in the same generalized-cost units as fares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkInstance {
    zones: Vec<Zone>,
    travel_time: Array2<f64>,
    potential_demand: Array2<f64>,
    outside_cost: Array2<f64>,
}

impl NetworkInstance {
    pub fn new(
        zones: Vec<Zone>,
        travel_time: Array2<f64>,
        potential_demand: Array2<f64>,
        outside_cost: Array2<f64>,
    ) -> Result<Self, ModelError> {
        let m = zones.len();
        if m == 0 {
            return Err(ModelError::InvalidInstance("instance has no zones".into()));
        }
        for (name, mat) in [
            ("travel_time", &travel_time),
            ("potential_demand", &potential_demand),
            ("outside_cost", &outside_cost),
        ] {
            if mat.dim() != (m, m) {
                return Err(ModelError::InvalidInstance(format!(
                    "{name} is {:?}, expected {m}x{m}",
                    mat.dim()
                )));
            }
            if let Some(((i, j), v)) = mat
                .indexed_iter()
                .find(|(_, v)| !v.is_finite() || **v < 0.0)
            {
                return Err(ModelError::InvalidEntry {
                    matrix: name,
                    row: i,
                    col: j,
                    value: *v,
                });
            }
        }
        if let Some(((i, j), _)) = potential_demand
            .indexed_iter()
            .find(|((i, j), v)| **v > 0.0 && travel_time[[*i, *j]] <= 0.0)
        {
            return Err(ModelError::InvalidEntry {
                matrix: "travel_time",
                row: i,
                col: j,
                value: travel_time[[i, j]],
            });
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(z) = zones.iter().find(|z| !seen.insert(z.id)) {
            return Err(ModelError::InvalidInstance(format!(
                "duplicate zone id {}",
                z.id
            )));
        }
        Ok(Self {
            zones,
            travel_time,
            potential_demand,
            outside_cost,
        })
    }

    pub fn num_zones(&self) -> usize {
        self.zones.len()
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn travel_time(&self) -> &Array2<f64> {
        &self.travel_time
    }

    pub fn potential_demand(&self) -> &Array2<f64> {
        &self.potential_demand
    }

    pub fn outside_cost(&self) -> &Array2<f64> {
        &self.outside_cost
    }

    pub fn total_potential_demand(&self) -> f64 {
        self.potential_demand.sum()
    }

    /// Σ_j λ⁰_ij for every origin.
    pub fn outbound_potential(&self) -> Vec<f64> {
        self.potential_demand
            .rows()
            .into_iter()
            .map(|row| row.sum())
            .collect()
    }

    pub fn zones_labelled(&self, label: ZoneLabel) -> Vec<usize> {
        self.zones
            .iter()
            .enumerate()
            .filter(|(_, z)| z.label == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Copy with λ⁰ multiplied by `factor`.
    pub fn with_demand_scale(&self, factor: f64) -> Result<Self, ModelError> {
        Self::new(
            self.zones.clone(),
            self.travel_time.clone(),
            &self.potential_demand * factor,
            self.outside_cost.clone(),
        )
    }

    pub fn with_outside_cost(&self, outside_cost: Array2<f64>) -> Result<Self, ModelError> {
        Self::new(
            self.zones.clone(),
            self.travel_time.clone(),
            self.potential_demand.clone(),
            outside_cost,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn zones(n: u32) -> Vec<Zone> {
        (1..=n)
            .map(|id| Zone {
                id,
                postal_code: None,
                label: ZoneLabel::Urban,
            })
            .collect()
    }

    #[test]
    fn rejects_negative_travel_time() {
        let err = NetworkInstance::new(
            zones(2),
            array![[1.0, -2.0], [2.0, 1.0]],
            array![[0.0, 0.0], [0.0, 0.0]],
            array![[0.0, 0.0], [0.0, 0.0]],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ModelError::InvalidEntry {
                matrix: "travel_time",
                row: 0,
                col: 1,
                ..
            }
        ));
    }

    #[test]
    fn rejects_zero_time_with_demand() {
        let err = NetworkInstance::new(
            zones(1),
            array![[0.0]],
            array![[1.0]],
            array![[1.0]],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::InvalidEntry { .. }));
    }

    #[test]
    fn rejects_shape_mismatch() {
        assert!(NetworkInstance::new(
            zones(2),
            array![[1.0]],
            array![[1.0]],
            array![[1.0]],
        )
        .is_err());
    }

    #[test]
    fn label_parsing() {
        assert_eq!("remote".parse::<ZoneLabel>().unwrap(), ZoneLabel::Remote);
        assert!("suburb".parse::<ZoneLabel>().is_err());
    }
}
