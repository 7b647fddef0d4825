//! Parameter sweeps over the AV cost or the wage floor, warm-started from
//! the neighbouring point, and the regime detector run on their results.

use std::path::Path;
use std::str::FromStr;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::files::ScenarioParams;
use super::solve::{solve, write_rows, Solution, Summary, WarmStart};
use super::ScenarioError;
use crate::model::NetworkInstance;

pub const SWEEP_FILE: &str = "sweep.csv";
pub const REGIMES_FILE: &str = "regimes.json";

/// Fleets below this many vehicles count as absent.
pub const ZERO_FLEET: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "D")]
    AvCost,
    #[serde(rename = "q_min")]
    WageFloor,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::AvCost => "D",
            SweepVariable::WageFloor => "q_min",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "D" => Ok(SweepVariable::AvCost),
            "q_min" => Ok(SweepVariable::WageFloor),
            other => Err(ScenarioError::Config(format!("unknown sweep variable `{other}`, expected D or q_min"))),
        }
    }
}

/// Values lo, lo + step, … up to hi, in $/hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    /// Hire only part of the willing supply; always on for wage-floor sweeps.
    pub regulated: bool,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, lo: f64, hi: f64, step: f64) -> Self {
        Self { variable, lo, hi, step, regulated: variable == SweepVariable::WageFloor }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let ok = self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi && self.step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(ScenarioError::Config(format!("sweep needs lo < hi and step > 0, got {self:?}")))
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.lo + self.step * k as f64).collect()
    }

    pub fn is_regulated(&self) -> bool {
        self.regulated || self.variable == SweepVariable::WageFloor
    }

    fn params_at(&self, base: &ScenarioParams, value: f64) -> ScenarioParams {
        let mut p = base.clone();
        match self.variable {
            SweepVariable::AvCost => p.behavior.av_cost = value,
            SweepVariable::WageFloor => p.behavior.q_min = Some(value),
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    PureAv,
    Mixed,
    PureHuman,
    /// Wage above the floor.
    FloorSlack,
    /// Wage at the floor and every willing driver hired.
    FullHire,
    /// Wage at the floor and only part of the willing supply hired.
    PartialHire,
    /// No human drivers left.
    Replaced,
    /// No vehicles of either kind.
    Empty,
}

impl Regime {
    pub fn of(variable: SweepVariable, s: &Summary) -> Self {
        let (av, human) = (s.n_a >= ZERO_FLEET, s.n_h >= ZERO_FLEET);
        if !av && !human {
            return Regime::Empty;
        }
        match variable {
            SweepVariable::AvCost => match (av, human) {
                (true, false) => Regime::PureAv,
                (false, true) => Regime::PureHuman,
                _ => Regime::Mixed,
            },
            SweepVariable::WageFloor => {
                let floor = s.q_min.unwrap_or(0.0);
                if !human {
                    Regime::Replaced
                } else if s.wage > floor + 1e-6 * floor.max(1.0) {
                    Regime::FloorSlack
                } else if s.hired_hours >= (1.0 - 1e-3) * s.willing_hours {
                    Regime::FullHire
                } else {
                    Regime::PartialHire
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpan {
    pub regime: Regime,
    pub from: f64,
    pub to: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub variable: SweepVariable,
    /// Maximal runs of equal regime over the solved points, in sweep order.
    pub spans: Vec<RegimeSpan>,
    /// Every regime occupies one run and the runs follow the natural order.
    pub ordered: bool,
    /// Largest AV cost with no human drivers.
    pub d_low: Option<f64>,
    /// Smallest AV cost with no AVs.
    pub d_high: Option<f64>,
    /// First value of each wage-floor regime.
    pub breakpoints: Vec<(Regime, f64)>,
    pub failures: Vec<f64>,
}

pub fn detect_regimes(variable: SweepVariable, points: &[(f64, Option<&Summary>)]) -> RegimeReport {
    let mut spans: Vec<RegimeSpan> = Vec::new();
    let mut failures = Vec::new();
    let (mut d_low, mut d_high) = (None, None);
    for (v, s) in points {
        let Some(s) = s else {
            failures.push(*v);
            continue;
        };
        let regime = Regime::of(variable, s);
        match spans.last_mut() {
            Some(last) if last.regime == regime => last.to = *v,
            _ => spans.push(RegimeSpan { regime, from: *v, to: *v }),
        }
        if variable == SweepVariable::AvCost {
            if s.n_h < ZERO_FLEET && s.n_a >= ZERO_FLEET {
                d_low = Some(d_low.map_or(*v, |d: f64| d.max(*v)));
            }
            if s.n_a < ZERO_FLEET && s.n_h >= ZERO_FLEET {
                d_high = Some(d_high.map_or(*v, |d: f64| d.min(*v)));
            }
        }
    }
    let ordered = spans.windows(2).all(|w| w[0].regime < w[1].regime);
    let breakpoints = if variable == SweepVariable::WageFloor {
        spans.iter().map(|s| (s.regime, s.from)).collect()
    } else {
        Vec::new()
    };
    RegimeReport { variable, spans, ordered, d_low, d_high, breakpoints, failures }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmColdCheck {
    pub value: f64,
    /// $/hour.
    pub warm_profit: f64,
    pub cold_profit: f64,
    pub relative_difference: f64,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: Result<Solution, String>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
    pub regimes: RegimeReport,
    pub checks: Vec<WarmColdCheck>,
}

impl SweepResult {
    pub fn summaries(&self) -> Vec<(f64, &Summary)> {
        self.points
            .iter()
            .filter_map(|p| p.outcome.as_ref().ok().map(|s| (p.value, &s.summary)))
            .collect()
    }
}

/// Solves every point in order, each warm-started from the last success.
/// Failures are recorded and the sweep goes on. Three interior points are
/// solved again from scratch to compare against the warm-started answer.
pub fn run_sweep(
    instance: &NetworkInstance,
    params: &ScenarioParams,
    spec: &SweepSpec,
) -> Result<SweepResult, ScenarioError> {
    spec.validate()?;
    let values = spec.values();
    let regulated = spec.is_regulated();
    let mut points = Vec::with_capacity(values.len());
    let mut warm: Option<WarmStart> = None;
    for &v in &values {
        let p = spec.params_at(params, v);
        let outcome = solve(instance, &p, regulated, warm.as_ref()).map_err(|e| e.to_string());
        match &outcome {
            Ok(sol) => {
                info!("{} = {v}: profit {:.1} gap {:.4}", spec.variable.as_str(), sol.summary.profit, sol.summary.gap);
                if let Some(w) = sol.warm_start() {
                    warm = Some(w);
                }
            }
            Err(e) => warn!("{} = {v} failed: {e}", spec.variable.as_str()),
        }
        points.push(SweepPoint { value: v, outcome });
    }

    let n = points.len();
    let mut picks: Vec<usize> = [n / 4, n / 2, 3 * n / 4].into_iter().filter(|&k| k > 0 && k < n).collect();
    picks.dedup();
    let mut checks = Vec::new();
    for k in picks {
        let Ok(warm_sol) = &points[k].outcome else { continue };
        let v = points[k].value;
        if let Ok(cold) = solve(instance, &spec.params_at(params, v), regulated, None) {
            let (w, c) = (warm_sol.summary.profit, cold.summary.profit);
            let scale = w.abs().max(c.abs());
            checks.push(WarmColdCheck {
                value: v,
                warm_profit: w,
                cold_profit: c,
                relative_difference: if scale > 0.0 { (w - c).abs() / scale } else { 0.0 },
            });
        }
    }

    let rows: Vec<(f64, Option<&Summary>)> =
        points.iter().map(|p| (p.value, p.outcome.as_ref().ok().map(|s| &s.summary))).collect();
    let regimes = detect_regimes(spec.variable, &rows);
    Ok(SweepResult { spec: *spec, points, regimes, checks })
}

/// `sweep.csv`: one row per point with the summary and per-zone columns,
/// and `regimes.json`: the regime report and warm/cold comparisons.
pub fn write_sweep(dir: &Path, instance: &NetworkInstance, result: &SweepResult) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|source| ScenarioError::Io { path: dir.to_path_buf(), source })?;
    let var = result.spec.variable.as_str();
    let summary_names: Vec<&str> = Summary::column_names();
    let ids: Vec<u32> = instance.zones().iter().map(|z| z.id).collect();
    let mut header = vec![format!("sweep_{var}"), "status".to_string()];
    header.extend(summary_names.iter().map(|s| s.to_string()));
    for id in &ids {
        for q in ["fare", "idle_av", "idle_h", "w_p", "w_d"] {
            header.push(format!("{q}_{id}"));
        }
    }
    let width = header.len();
    let rows = result.points.iter().map(|p| {
        let mut row = vec![p.value.to_string()];
        match &p.outcome {
            Ok(sol) => {
                row.push("ok".into());
                row.extend(sol.summary.columns().into_iter().map(|(_, v)| v));
                for z in &sol.zones {
                    row.extend([z.fare, z.idle_av, z.idle_h, z.w_p, z.w_d].map(|v| v.to_string()));
                }
            }
            Err(e) => row.push(format!("failed: {e}")),
        }
        row.resize(width, String::new());
        row
    });
    write_rows(
        &dir.join(SWEEP_FILE),
        &[
            "# synthetic instance: only regime structure and aggregates are meaningful, not per-zone curves",
            "# money in $ per hour; fares in $ per trip minute; demand in passengers per minute; waits in minutes",
        ],
        header,
        rows,
    )?;
    #[derive(Serialize)]
    struct Out<'a> {
        regimes: &'a RegimeReport,
        warm_cold_checks: &'a [WarmColdCheck],
    }
    let json = serde_json::to_string_pretty(&Out { regimes: &result.regimes, warm_cold_checks: &result.checks })
        .expect("report serializes");
    let path = dir.join(REGIMES_FILE);
    std::fs::write(&path, json + "\n").map_err(|source| ScenarioError::Io { path, source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(n_a: f64, n_h: f64) -> Summary {
        Summary { n_a, n_h, ..Summary::default() }
    }

    #[test]
    fn values_include_both_ends() {
        let s = SweepSpec::new(SweepVariable::AvCost, 5.0, 6.0, 0.25);
        assert_eq!(s.values(), vec![5.0, 5.25, 5.5, 5.75, 6.0]);
        assert_eq!(SweepSpec::new(SweepVariable::AvCost, 5.0, 60.0, 1.0).values().len(), 56);
        assert!(SweepSpec::new(SweepVariable::AvCost, 6.0, 5.0, 1.0).validate().is_err());
        assert!(SweepSpec::new(SweepVariable::AvCost, 5.0, 6.0, 0.0).validate().is_err());
    }

    #[test]
    fn av_cost_regimes_and_boundaries() {
        let data = [(5.0, 900.0, 0.05), (10.0, 700.0, 0.09), (15.0, 500.0, 30.0), (40.0, 0.05, 400.0), (45.0, 0.0, 420.0)];
        let sums: Vec<Summary> = data.iter().map(|&(_, a, h)| summary(a, h)).collect();
        let points: Vec<(f64, Option<&Summary>)> = data.iter().zip(&sums).map(|(d, s)| (d.0, Some(s))).collect();
        let r = detect_regimes(SweepVariable::AvCost, &points);
        assert_eq!(r.spans.iter().map(|s| s.regime).collect::<Vec<_>>(), [Regime::PureAv, Regime::Mixed, Regime::PureHuman]);
        assert!(r.ordered);
        assert_eq!((r.d_low, r.d_high), (Some(10.0), Some(40.0)));
    }

    #[test]
    fn out_of_order_is_flagged() {
        let sums = [summary(0.0, 10.0), summary(10.0, 10.0), summary(0.0, 10.0)];
        let points: Vec<(f64, Option<&Summary>)> = sums.iter().enumerate().map(|(k, s)| (k as f64, Some(s))).collect();
        assert!(!detect_regimes(SweepVariable::AvCost, &points).ordered);
    }

    #[test]
    fn wage_floor_regimes() {
        let mut s = summary(100.0, 50.0);
        s.q_min = Some(10.0);
        s.wage = 12.0;
        assert_eq!(Regime::of(SweepVariable::WageFloor, &s), Regime::FloorSlack);
        s.wage = 10.0;
        s.hired_hours = 50.0;
        s.willing_hours = 50.0;
        assert_eq!(Regime::of(SweepVariable::WageFloor, &s), Regime::FullHire);
        s.willing_hours = 80.0;
        assert_eq!(Regime::of(SweepVariable::WageFloor, &s), Regime::PartialHire);
        s.n_h = 0.0;
        assert_eq!(Regime::of(SweepVariable::WageFloor, &s), Regime::Replaced);
    }
}
