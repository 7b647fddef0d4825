//! Instance directories: `zones.csv`, three OD matrices and `params.json`.
//!
//! Matrices carry a header row and a first column of zone ids and a `#`
//! comment line with their unit. Numbers are written in Rust's shortest
//! round-trip form, so write → read → write reproduces the bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::ScenarioError;
use crate::dual::DualConfig;
use crate::model::{BehaviorParams, NetworkInstance, Zone, ZoneLabel};
use crate::refine::RefineConfig;

pub const ZONES_FILE: &str = "zones.csv";
pub const TRAVEL_TIME_FILE: &str = "travel_time.csv";
pub const DEMAND_FILE: &str = "demand.csv";
pub const OUTSIDE_COST_FILE: &str = "outside_cost.csv";
pub const PARAMS_FILE: &str = "params.json";

const MATRICES: [(&str, &str); 3] = [
    (TRAVEL_TIME_FILE, "# travel time, minutes"),
    (DEMAND_FILE, "# potential demand, passengers per minute"),
    (OUTSIDE_COST_FILE, "# outside-option generalized cost, $ per trip"),
];

/// Solver settings that `params.json` may override under the `dual` and
/// `refine` keys.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dual: DualConfig,
    /// Defaults to a search box matching the dual grids.
    pub refine: Option<RefineConfig>,
}

impl SolverConfig {
    pub fn refine_config(&self, regulated: bool) -> RefineConfig {
        let mut cfg = self.refine.clone().unwrap_or_else(|| RefineConfig::matching(&self.dual));
        cfg.regulated |= regulated;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub behavior: BehaviorParams,
    pub solver: SolverConfig,
}

impl ScenarioParams {
    pub fn new(behavior: BehaviorParams) -> Self {
        Self { behavior, solver: SolverConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFiles {
    pub instance: NetworkInstance,
    pub params: ScenarioParams,
}

/// Parses `params.json`: the behavioural keys at top level plus optional
/// `dual` and `refine` objects. Unknown keys anywhere are rejected.
pub fn params_from_json(text: &str) -> Result<ScenarioParams, ScenarioError> {
    let bad = |e: serde_json::Error| ScenarioError::Parse {
        file: PARAMS_FILE.into(),
        line: e.line() as u64,
        message: e.to_string(),
    };
    let mut map: Map<String, Value> = serde_json::from_str(text).map_err(bad)?;
    let dual = match map.remove("dual") {
        Some(v) => serde_json::from_value(v).map_err(bad)?,
        None => DualConfig::default(),
    };
    let refine = match map.remove("refine") {
        Some(v) => Some(serde_json::from_value(v).map_err(bad)?),
        None => None,
    };
    let behavior: BehaviorParams = serde_json::from_value(Value::Object(map)).map_err(bad)?;
    Ok(ScenarioParams { behavior, solver: SolverConfig { dual, refine } })
}

/// Inverse of [`params_from_json`]; default solver sections are omitted.
pub fn params_to_json(params: &ScenarioParams) -> String {
    let mut value = serde_json::to_value(params.behavior).expect("parameters serialize");
    let map = value.as_object_mut().expect("parameters are an object");
    if params.solver.dual != DualConfig::default() {
        map.insert("dual".into(), serde_json::to_value(&params.solver.dual).expect("config serializes"));
    }
    if let Some(r) = &params.solver.refine {
        map.insert("refine".into(), serde_json::to_value(r).expect("config serializes"));
    }
    let mut text = serde_json::to_string_pretty(&value).expect("json");
    text.push('\n');
    text
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn csv_error(file: &str, e: csv::Error) -> ScenarioError {
    let line = e.position().map_or(0, |p| p.line());
    ScenarioError::Parse { file: file.into(), line, message: e.to_string() }
}

pub fn parse_zones(text: &str) -> Result<Vec<Zone>, ScenarioError> {
    let file = ZONES_FILE;
    let mut rows = reader(text).into_records();
    let header = rows
        .next()
        .ok_or_else(|| ScenarioError::Parse { file: file.into(), line: 1, message: "empty file".into() })?
        .map_err(|e| csv_error(file, e))?;
    if header.iter().collect::<Vec<_>>() != ["zone_id", "postal_code", "label"] {
        return Err(ScenarioError::Parse {
            file: file.into(),
            line: line_of(&header),
            message: "expected header zone_id,postal_code,label".into(),
        });
    }
    let mut zones = Vec::new();
    for row in rows {
        let row = row.map_err(|e| csv_error(file, e))?;
        let line = line_of(&row);
        let err = |message: String| ScenarioError::Parse { file: file.into(), line, message };
        if row.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", row.len())));
        }
        let id = row[0].parse::<u32>().map_err(|e| err(format!("zone_id `{}`: {e}", &row[0])))?;
        let postal_code = (!row[1].is_empty()).then(|| row[1].to_string());
        let label = row[2].parse::<ZoneLabel>().map_err(|e| err(e.to_string()))?;
        zones.push(Zone { id, postal_code, label });
    }
    if zones.is_empty() {
        return Err(ScenarioError::Parse { file: file.into(), line: 0, message: "no zones".into() });
    }
    Ok(zones)
}

/// Reads a square matrix whose header row and first column list `ids` in
/// order. Entries must be finite and non-negative.
pub fn parse_matrix(file: &str, text: &str, ids: &[u32]) -> Result<Array2<f64>, ScenarioError> {
    let m = ids.len();
    let mut rows = reader(text).into_records();
    let header = rows
        .next()
        .ok_or_else(|| ScenarioError::Parse { file: file.into(), line: 1, message: "empty file".into() })?
        .map_err(|e| csv_error(file, e))?;
    let expected: Vec<String> = std::iter::once("zone_id".to_string()).chain(ids.iter().map(u32::to_string)).collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(ScenarioError::Parse {
            file: file.into(),
            line: line_of(&header),
            message: format!("header must be {}", expected.join(",")),
        });
    }
    let mut out = Array2::zeros((m, m));
    let mut count = 0;
    for row in rows {
        let row = row.map_err(|e| csv_error(file, e))?;
        let line = line_of(&row);
        let err = |message: String| ScenarioError::Parse { file: file.into(), line, message };
        if count == m {
            return Err(err(format!("more than {m} rows")));
        }
        if row.len() != m + 1 {
            return Err(err(format!("expected {} fields, found {}", m + 1, row.len())));
        }
        if row[0] != ids[count].to_string() {
            return Err(err(format!("row label `{}` should be zone {}", &row[0], ids[count])));
        }
        for j in 0..m {
            let v: f64 = row[j + 1]
                .parse()
                .map_err(|e| err(format!("column {}: `{}`: {e}", ids[j], &row[j + 1])))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(err(format!("column {}: {v} must be finite and non-negative", ids[j])));
            }
            out[[count, j]] = v;
        }
        count += 1;
    }
    if count != m {
        return Err(ScenarioError::Parse {
            file: file.into(),
            line: 0,
            message: format!("found {count} rows, expected {m}"),
        });
    }
    Ok(out)
}

pub fn format_zones(zones: &[Zone]) -> String {
    let mut s = String::from("# label is urban or remote\nzone_id,postal_code,label\n");
    for z in zones {
        let _ = writeln!(s, "{},{},{}", z.id, z.postal_code.as_deref().unwrap_or(""), z.label.as_str());
    }
    s
}

pub fn format_matrix(comment: &str, ids: &[u32], mat: &Array2<f64>) -> String {
    let mut s = format!("{comment}\nzone_id");
    for id in ids {
        let _ = write!(s, ",{id}");
    }
    s.push('\n');
    for (i, id) in ids.iter().enumerate() {
        let _ = write!(s, "{id}");
        for v in mat.row(i) {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

fn read(dir: &Path, name: &str) -> Result<String, ScenarioError> {
    let path = dir.join(name);
    fs::read_to_string(&path).map_err(|source| ScenarioError::Io { path, source })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), ScenarioError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| ScenarioError::Io { path, source })
}

pub fn read_params(dir: &Path) -> Result<ScenarioParams, ScenarioError> {
    params_from_json(&read(dir, PARAMS_FILE)?)
}

pub fn read_instance_dir(dir: &Path) -> Result<InstanceFiles, ScenarioError> {
    let zones = parse_zones(&read(dir, ZONES_FILE)?)?;
    let ids: Vec<u32> = zones.iter().map(|z| z.id).collect();
    let [t, l0, c0] = MATRICES.map(|(name, _)| read(dir, name).and_then(|text| parse_matrix(name, &text, &ids)));
    let instance = NetworkInstance::new(zones, t?, l0?, c0?)?;
    let params = read_params(dir)?;
    params.behavior.validate()?;
    Ok(InstanceFiles { instance, params })
}

pub fn write_instance_dir(dir: &Path, files: &InstanceFiles) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir).map_err(|source| ScenarioError::Io { path: dir.to_path_buf(), source })?;
    write_instance(dir, &files.instance)?;
    write(dir, PARAMS_FILE, &params_to_json(&files.params))
}

/// Writes the zone table and the three matrices only.
pub fn write_instance(dir: &Path, instance: &NetworkInstance) -> Result<(), ScenarioError> {
    let ids: Vec<u32> = instance.zones().iter().map(|z| z.id).collect();
    write(dir, ZONES_FILE, &format_zones(instance.zones()))?;
    let mats = [instance.travel_time(), instance.potential_demand(), instance.outside_cost()];
    for ((name, comment), mat) in MATRICES.iter().zip(mats) {
        write(dir, name, &format_matrix(comment, &ids, mat))?;
    }
    Ok(())
}
