//! Validation of an instance directory: unit plausibility, solver settings,
//! one full solve with its residual suite, and the existence report.

use serde::{Deserialize, Serialize};

use super::files::InstanceFiles;
use super::solve::solve;
use crate::equilibrium::{check_existence_conditions, ExistenceReport, ResidualReport};

/// Longest plausible trip, minutes.
const MAX_TRIP_MINUTES: f64 = 24.0 * 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Data,
    Solver,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
    pub residuals: Option<ResidualReport>,
    /// Sufficient conditions only; reported, not required.
    pub existence: Option<ExistenceReport>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckItem> {
        self.items.iter().find(|i| !i.passed)
    }
}

fn item(name: &str, kind: CheckKind, passed: bool, detail: String) -> CheckItem {
    CheckItem { name: name.into(), kind, passed, detail }
}

/// Runs every check; the solve is skipped when a data check fails.
pub fn check(files: &InstanceFiles, regulated: bool) -> CheckReport {
    let inst = &files.instance;
    let p = &files.params.behavior;
    let dual = &files.params.solver.dual;
    let wages = dual.wage_grid;
    let mut items = Vec::new();

    items.push(item(
        "outside wage in $/hour",
        CheckKind::Data,
        wages.lo <= p.q0 && p.q0 <= wages.hi,
        format!("q0 = {} against wage range [{}, {}] $/h", p.q0, wages.lo, wages.hi),
    ));
    let floor_ok = !regulated || p.q_min.is_none_or(|q| q <= wages.hi);
    items.push(item(
        "wage floor inside wage range",
        CheckKind::Data,
        floor_ok,
        format!("q_min = {:?} $/h, wage range ends at {} $/h", p.q_min, wages.hi),
    ));
    let t = inst.travel_time();
    let bad_trip = inst
        .potential_demand()
        .indexed_iter()
        .find(|((i, j), l)| **l > 0.0 && !(t[[*i, *j]] > 0.0 && t[[*i, *j]] <= MAX_TRIP_MINUTES));
    let ids = |i: usize| inst.zones()[i].id;
    items.push(item(
        "travel times in minutes",
        CheckKind::Data,
        bad_trip.is_none(),
        match bad_trip {
            Some(((i, j), _)) => format!("zone {} -> {}: {} min", ids(i), ids(j), t[[i, j]]),
            None => format!("all demanded trips within (0, {MAX_TRIP_MINUTES}] min"),
        },
    ));
    let settings = dual.validate(p).map_err(|e| e.to_string());
    items.push(item(
        "solver settings",
        CheckKind::Data,
        settings.is_ok(),
        settings.err().unwrap_or_else(|| "valid".into()),
    ));

    let mut report = CheckReport { items, residuals: None, existence: None };
    if !report.passed() {
        return report;
    }
    match solve(inst, &files.params, regulated, None) {
        Ok(sol) => {
            let s = &sol.summary;
            if let Some(r) = &sol.report {
                let worst = r.residuals.max();
                report.items.push(item(
                    "equilibrium residuals",
                    CheckKind::Solver,
                    worst <= 1e-6,
                    format!("largest relative residual {worst:e}"),
                ));
                report.residuals = Some(r.residuals);
                report.existence = Some(check_existence_conditions(inst, p, &r.decision));
            }
            report.items.push(item(
                "profit below relaxed bound",
                CheckKind::Solver,
                s.profit <= s.upper_bound + 1e-9 * s.upper_bound.abs(),
                format!("profit {} $/h, bound {} $/h", s.profit, s.upper_bound),
            ));
        }
        Err(e) => report.items.push(item(
            "solve",
            if e.exit_code() == 2 { CheckKind::Data } else { CheckKind::Solver },
            false,
            e.to_string(),
        )),
    }
    report
}
