//! Full pipeline on one instance (relaxed bound, then refined decision) and
//! the rows of `summary.csv` and `solution.csv`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::files::ScenarioParams;
use super::ScenarioError;
use crate::dual::run_dual;
use crate::model::units::per_minute_to_hourly;
use crate::model::{BehaviorParams, NetworkInstance, PlatformDecision, ZoneLabel};
use crate::refine::{refine, refine_from, SolveReport};

pub const SOLUTION_FILE: &str = "solution.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

const SUMMARY_UNITS: &str =
    "# money in $ per hour; demand in passengers per minute; fleets in vehicles; waits in minutes";
const SOLUTION_UNITS: &str =
    "# fare in $ per trip minute; idle counts in vehicles; waits in minutes; demand in passengers per minute";

/// Starting information carried over from a neighbouring solve.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    /// Multiplier, $/min per vehicle.
    pub mu: f64,
    pub decision: PlatformDecision,
}

/// Aggregate outcome of one solve. Money is in $/hour.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub av_cost: f64,
    pub q_min: Option<f64>,
    pub regulated: bool,
    pub profit: f64,
    pub upper_bound: f64,
    pub gap: f64,
    pub n_a: f64,
    pub n_h: f64,
    pub av_share: f64,
    pub hired_hours: f64,
    pub willing_hours: f64,
    pub demand: f64,
    pub mode_share: f64,
    pub wage: f64,
    pub mean_fare: f64,
    pub mean_wait: f64,
    pub occupancy_av: f64,
    pub occupancy_h: f64,
    /// Mean human share of the idle pool over served zones of each label.
    pub human_share_urban: Option<f64>,
    pub human_share_remote: Option<f64>,
    pub passenger_surplus: f64,
    pub driver_surplus: f64,
    pub welfare: f64,
    pub residual: f64,
    pub evaluations: usize,
    pub dual_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneRow {
    pub zone_id: u32,
    pub label: ZoneLabel,
    /// $ per trip minute.
    pub fare: f64,
    pub idle_av: f64,
    pub idle_h: f64,
    pub w_p: f64,
    pub w_d: f64,
    pub human_share: Option<f64>,
    pub demand_out: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub summary: Summary,
    pub zones: Vec<ZoneRow>,
    /// Absent for the zero-demand special case.
    pub report: Option<SolveReport>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

impl Summary {
    pub fn column_names() -> Vec<&'static str> {
        Self::default().columns().into_iter().map(|(k, _)| k).collect()
    }

    /// Column names and values in file order.
    pub fn columns(&self) -> Vec<(&'static str, String)> {
        vec![
            ("D", self.av_cost.to_string()),
            ("q_min", fmt_opt(self.q_min)),
            ("regulated", self.regulated.to_string()),
            ("profit", self.profit.to_string()),
            ("upper_bound", self.upper_bound.to_string()),
            ("gap", self.gap.to_string()),
            ("n_a", self.n_a.to_string()),
            ("n_h", self.n_h.to_string()),
            ("av_share", self.av_share.to_string()),
            ("hired_hours", self.hired_hours.to_string()),
            ("willing_hours", self.willing_hours.to_string()),
            ("demand", self.demand.to_string()),
            ("mode_share", self.mode_share.to_string()),
            ("wage", self.wage.to_string()),
            ("mean_fare", self.mean_fare.to_string()),
            ("mean_wait", self.mean_wait.to_string()),
            ("occupancy_av", self.occupancy_av.to_string()),
            ("occupancy_h", self.occupancy_h.to_string()),
            ("human_share_urban", fmt_opt(self.human_share_urban)),
            ("human_share_remote", fmt_opt(self.human_share_remote)),
            ("passenger_surplus", self.passenger_surplus.to_string()),
            ("driver_surplus", self.driver_surplus.to_string()),
            ("welfare", self.welfare.to_string()),
            ("residual", self.residual.to_string()),
            ("evaluations", self.evaluations.to_string()),
            ("dual_iterations", self.dual_iterations.to_string()),
        ]
    }
}

impl ZoneRow {
    pub fn columns(&self) -> Vec<(&'static str, String)> {
        vec![
            ("zone_id", self.zone_id.to_string()),
            ("label", self.label.as_str().to_string()),
            ("fare", self.fare.to_string()),
            ("idle_av", self.idle_av.to_string()),
            ("idle_h", self.idle_h.to_string()),
            ("w_p", self.w_p.to_string()),
            ("w_d", self.w_d.to_string()),
            ("human_share", fmt_opt(self.human_share)),
            ("demand_out", self.demand_out.to_string()),
        ]
    }
}

fn mean_share(rows: &[ZoneRow], label: ZoneLabel) -> Option<f64> {
    let shares: Vec<f64> = rows.iter().filter(|z| z.label == label).filter_map(|z| z.human_share).collect();
    (!shares.is_empty()).then(|| shares.iter().sum::<f64>() / shares.len() as f64)
}

impl Solution {
    pub fn from_report(instance: &NetworkInstance, params: &BehaviorParams, regulated: bool, report: SolveReport) -> Self {
        let m = &report.metrics;
        let zones: Vec<ZoneRow> = instance
            .zones()
            .iter()
            .zip(&m.zones)
            .map(|(z, s)| ZoneRow {
                zone_id: z.id,
                label: z.label,
                fare: s.fare,
                idle_av: s.idle_av,
                idle_h: s.idle_h,
                w_p: s.w_p,
                w_d: s.w_d,
                human_share: s.human_share,
                demand_out: s.demand_out,
            })
            .collect();
        let fleet = m.n_a + m.n_h;
        let potential = instance.total_potential_demand();
        let summary = Summary {
            av_cost: params.av_cost,
            q_min: params.q_min,
            regulated,
            profit: per_minute_to_hourly(report.profit),
            upper_bound: per_minute_to_hourly(report.upper_bound),
            gap: report.gap,
            n_a: m.n_a,
            n_h: m.n_h,
            av_share: if fleet > 0.0 { m.n_a / fleet } else { 0.0 },
            hired_hours: report.decision.human_hours(params),
            willing_hours: params.willing_supply(report.decision.q),
            demand: m.total_demand,
            mode_share: if potential > 0.0 { m.total_demand / potential } else { 0.0 },
            wage: report.decision.q,
            mean_fare: m.mean_fare,
            mean_wait: m.mean_wait,
            occupancy_av: m.occupancy_av,
            occupancy_h: m.occupancy_h,
            human_share_urban: mean_share(&zones, ZoneLabel::Urban),
            human_share_remote: mean_share(&zones, ZoneLabel::Remote),
            passenger_surplus: per_minute_to_hourly(m.passenger_surplus),
            driver_surplus: per_minute_to_hourly(m.driver_surplus),
            welfare: per_minute_to_hourly(m.social_welfare),
            residual: report.residuals.max(),
            evaluations: report.evaluations,
            dual_iterations: report.relaxed.iterations,
        };
        Self { summary, zones, report: Some(report) }
    }

    /// No potential demand: nothing to serve, nobody hired, zero profit.
    pub fn empty(instance: &NetworkInstance, params: &BehaviorParams, regulated: bool, fare: f64) -> Self {
        let zones = instance
            .zones()
            .iter()
            .map(|z| ZoneRow {
                zone_id: z.id,
                label: z.label,
                fare,
                idle_av: 0.0,
                idle_h: 0.0,
                w_p: f64::INFINITY,
                w_d: f64::INFINITY,
                human_share: None,
                demand_out: 0.0,
            })
            .collect();
        let summary = Summary { av_cost: params.av_cost, q_min: params.q_min, regulated, ..Summary::default() };
        Self { summary, zones, report: None }
    }

    pub fn warm_start(&self) -> Option<WarmStart> {
        self.report.as_ref().map(|r| WarmStart { mu: r.relaxed.mu_best, decision: r.decision.clone() })
    }
}

/// Relaxed bound, then pattern search from the relaxed point. With a warm
/// start the multiplier starts at the neighbour's value and the search also
/// runs from the neighbour's decision; the better of the two is kept.
pub fn solve(
    instance: &NetworkInstance,
    params: &ScenarioParams,
    regulated: bool,
    warm: Option<&WarmStart>,
) -> Result<Solution, ScenarioError> {
    let behavior = &params.behavior;
    let mut dual = params.solver.dual.clone();
    if instance.total_potential_demand() == 0.0 {
        behavior.validate()?;
        return Ok(Solution::empty(instance, behavior, regulated, dual.fare_grid.lo));
    }
    if let Some(w) = warm {
        dual.mu0 = Some(w.mu);
    }
    let relaxed = run_dual(instance, behavior, &dual, regulated)?;
    let config = params.solver.refine_config(regulated);
    let mut report = refine(instance, behavior, &relaxed, &config)?;
    if let Some(w) = warm {
        if let Ok(alt) = refine_from(instance, behavior, &relaxed, &w.decision, &config) {
            if alt.profit > report.profit {
                report = alt;
            }
        }
    }
    Ok(Solution::from_report(instance, behavior, regulated, report))
}

pub(crate) fn write_rows(
    path: &Path,
    comments: &[&str],
    header: Vec<String>,
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), ScenarioError> {
    let io = |source| ScenarioError::Io { path: path.to_path_buf(), source };
    let mut buf = Vec::new();
    for c in comments {
        buf.extend_from_slice(c.as_bytes());
        buf.push(b'\n');
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let csv_io = |e: csv::Error| ScenarioError::Io { path: path.to_path_buf(), source: e.into() };
        w.write_record(&header).map_err(csv_io)?;
        for row in rows {
            w.write_record(&row).map_err(csv_io)?;
        }
        w.flush().map_err(io)?;
    }
    std::fs::write(path, buf).map_err(io)
}

pub fn write_solution(dir: &Path, solution: &Solution) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|source| ScenarioError::Io { path: dir.to_path_buf(), source })?;
    let cols = solution.summary.columns();
    write_rows(
        &dir.join(SUMMARY_FILE),
        &[SUMMARY_UNITS],
        cols.iter().map(|(k, _)| k.to_string()).collect(),
        [cols.into_iter().map(|(_, v)| v).collect()],
    )?;
    let header = match solution.zones.first() {
        Some(z) => z.columns().into_iter().map(|(k, _)| k.to_string()).collect(),
        None => Vec::new(),
    };
    write_rows(
        &dir.join(SOLUTION_FILE),
        &[SOLUTION_UNITS],
        header,
        solution.zones.iter().map(|z| z.columns().into_iter().map(|(_, v)| v).collect()),
    )
}
