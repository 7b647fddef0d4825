use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::fixed_point::snapshot;
use crate::model::{BehaviorParams, NetworkInstance, PlatformDecision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionStatus {
    Pass,
    /// Holds only with equality.
    Boundary,
    Fail,
}

/// Repositioning outflow against attainable pickups when every willing
/// driver idles in this one zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneExistence {
    pub outbound_reposition: f64,
    pub pickup_capacity: f64,
    pub status: ConditionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    /// Demand vanishes as a zone runs out of idle vehicles. Always true for
    /// logit demand with square-root waits.
    pub demand_vanishes_without_supply: bool,
    /// w·F_p(αw + c) → 0 as w → ∞; also automatic for the logit form.
    pub wait_weighted_demand_vanishes: bool,
    pub zones: Vec<ZoneExistence>,
}

impl ExistenceReport {
    pub fn all_pass(&self) -> bool {
        self.demand_vanishes_without_supply
            && self.wait_weighted_demand_vanishes
            && self.zones.iter().all(|z| z.status == ConditionStatus::Pass)
    }

    pub fn failing_zones(&self) -> Vec<usize> {
        self.zones
            .iter()
            .enumerate()
            .filter(|(_, z)| z.status != ConditionStatus::Pass)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Sufficient conditions for an equilibrium with positive idle drivers.
pub fn check_existence_conditions(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    decision: &PlatformDecision,
) -> ExistenceReport {
    let m = instance.num_zones();
    let budget = decision.human_hours(params);
    let zones = (0..m)
        .map(|i| {
            let mut idle_h = Array1::zeros(m);
            idle_h[i] = budget;
            match snapshot(instance, params, decision, budget, &idle_h) {
                Ok(snap) => {
                    let outbound = snap.p.row(i).sum() * snap.dropoffs[i];
                    let capacity = snap.pickups[i];
                    let status = if outbound < capacity {
                        ConditionStatus::Pass
                    } else if outbound == capacity {
                        ConditionStatus::Boundary
                    } else {
                        ConditionStatus::Fail
                    };
                    ZoneExistence { outbound_reposition: outbound, pickup_capacity: capacity, status }
                }
                Err(_) => ZoneExistence {
                    outbound_reposition: f64::NAN,
                    pickup_capacity: 0.0,
                    status: ConditionStatus::Fail,
                },
            }
        })
        .collect();
    ExistenceReport {
        demand_vanishes_without_supply: true,
        wait_weighted_demand_vanishes: true,
        zones,
    }
}
