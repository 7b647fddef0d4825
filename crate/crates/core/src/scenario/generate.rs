//! Seeded synthetic city resembling San Francisco at postal-code resolution.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{NetworkInstance, Zone, ZoneLabel};

/// (postal code, label, x km, y km) of the 19 zones.
const CITY: [(&str, ZoneLabel, f64, f64); 19] = [
    ("94104", ZoneLabel::Urban, 6.0, 5.5),
    ("94103", ZoneLabel::Urban, 5.0, 4.0),
    ("94109", ZoneLabel::Urban, 4.5, 6.2),
    ("94115", ZoneLabel::Urban, 3.2, 5.5),
    ("94118", ZoneLabel::Remote, 1.5, 5.2),
    ("94123", ZoneLabel::Urban, 3.5, 7.2),
    ("94108", ZoneLabel::Urban, 5.5, 6.8),
    ("94121", ZoneLabel::Remote, -0.5, 5.5),
    ("94102", ZoneLabel::Urban, 4.6, 4.9),
    ("94117", ZoneLabel::Urban, 2.6, 4.2),
    ("94122", ZoneLabel::Remote, 0.5, 3.5),
    ("94114", ZoneLabel::Urban, 3.3, 3.2),
    ("94107", ZoneLabel::Urban, 6.3, 3.3),
    ("94110", ZoneLabel::Urban, 4.6, 2.4),
    ("94131", ZoneLabel::Remote, 3.0, 1.5),
    ("94116", ZoneLabel::Remote, 0.3, 1.8),
    ("94124", ZoneLabel::Remote, 6.5, 0.8),
    ("94132", ZoneLabel::Remote, 0.5, 0.0),
    ("94112", ZoneLabel::Remote, 3.0, 0.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Fixed pickup/drop-off overhead of every trip, min.
    pub base_time: f64,
    /// Driving minutes per km.
    pub pace: f64,
    /// Typical trip length inside a zone, km.
    pub intra_distance: f64,
    /// Coordinate jitter half-width, km.
    pub jitter: f64,
    /// Gravity-model decay time, min.
    pub gravity_decay: f64,
    /// Range of urban demand weights relative to a remote weight of ~1.
    pub urban_weight: (f64, f64),
    pub remote_weight: (f64, f64),
    /// Σλ⁰, passengers/min.
    pub total_potential: f64,
    /// Outside-option cost c⁰ = offset + slope·t.
    pub outside_offset: f64,
    pub outside_slope: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            base_time: 5.0,
            pace: 3.5,
            intra_distance: 1.0,
            jitter: 0.3,
            gravity_decay: 30.0,
            urban_weight: (3.0, 6.0),
            remote_weight: (0.8, 1.2),
            total_potential: 148.0 / 0.15,
            outside_offset: 7.8,
            outside_slope: 0.8,
        }
    }
}

/// Outside-option costs offset + slope·t for the given travel times.
pub fn outside_costs(t: &Array2<f64>, offset: f64, slope: f64) -> Array2<f64> {
    t.mapv(|v| (offset + slope * v).max(0.0))
}

/// Synthetic `m`-zone city (at most 19 zones, taken in table order).
pub fn generate_instance(seed: u64, m: usize, config: &GeneratorConfig) -> NetworkInstance {
    assert!((1..=CITY.len()).contains(&m), "between 1 and {} zones", CITY.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for (_, label, x, y) in &CITY[..m] {
        let jx = rng.gen_range(-config.jitter..=config.jitter);
        let jy = rng.gen_range(-config.jitter..=config.jitter);
        coords.push((x + jx, y + jy));
        let (lo, hi) = match label {
            ZoneLabel::Urban => config.urban_weight,
            ZoneLabel::Remote => config.remote_weight,
        };
        weights.push(rng.gen_range(lo..=hi));
    }
    let t = Array2::from_shape_fn((m, m), |(i, j)| {
        let km = if i == j {
            config.intra_distance
        } else {
            let (dx, dy) = (coords[i].0 - coords[j].0, coords[i].1 - coords[j].1);
            (dx * dx + dy * dy).sqrt()
        };
        config.base_time + config.pace * km
    });
    let mut l0 = Array2::from_shape_fn((m, m), |(i, j)| {
        weights[i] * weights[j] * (-t[[i, j]] / config.gravity_decay).exp()
    });
    let total = l0.sum();
    l0.mapv_inplace(|v| v * config.total_potential / total);
    let zones = CITY[..m]
        .iter()
        .enumerate()
        .map(|(k, (code, label, _, _))| Zone {
            id: k as u32 + 1,
            postal_code: Some(code.to_string()),
            label: *label,
        })
        .collect();
    let c0 = outside_costs(&t, config.outside_offset, config.outside_slope);
    NetworkInstance::new(zones, t, l0, c0).expect("generated instance is valid")
}
