//! Versioned, deterministic run reports and their JSON/CSV emission.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig};
use crate::error::{FolstabError, Result};

pub const SCHEMA: &str = "folstab-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub metadata: Metadata,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub config: BTreeMap<String, String>,
    /// SHA-256 of the canonical config lines.
    pub config_hash: String,
    pub seed: u64,
    pub tolerance_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Passed,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub status: Status,
    pub checks: Vec<Check>,
    pub data: BTreeMap<String, Value>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "is")]
    Is,
}

/// A gated quantity. `value` is `None` when the computation produced a
/// non-finite number, which never passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub flag: Option<bool>,
    pub relation: Relation,
    pub tolerance: Option<f64>,
    pub expected: Option<bool>,
    pub resolution: Vec<usize>,
    pub passed: bool,
}

impl Check {
    fn numeric(name: &str, value: f64, relation: Relation, tolerance: f64, resolution: &[usize]) -> Self {
        let passed = value.is_finite()
            && match relation {
                Relation::Le => value <= tolerance,
                Relation::Ge => value >= tolerance,
                Relation::Lt => value < tolerance,
                Relation::Is => unreachable!(),
            };
        Check {
            name: name.to_string(),
            value: value.is_finite().then_some(value),
            flag: None,
            relation,
            tolerance: Some(tolerance),
            expected: None,
            resolution: resolution.to_vec(),
            passed,
        }
    }

    pub fn le(name: &str, value: f64, tolerance: f64, resolution: &[usize]) -> Self {
        Check::numeric(name, value, Relation::Le, tolerance, resolution)
    }

    pub fn ge(name: &str, value: f64, tolerance: f64, resolution: &[usize]) -> Self {
        Check::numeric(name, value, Relation::Ge, tolerance, resolution)
    }

    pub fn lt(name: &str, value: f64, tolerance: f64, resolution: &[usize]) -> Self {
        Check::numeric(name, value, Relation::Lt, tolerance, resolution)
    }

    pub fn flag(name: &str, value: bool, expected: bool, resolution: &[usize]) -> Self {
        Check {
            name: name.to_string(),
            value: None,
            flag: Some(value),
            relation: Relation::Is,
            tolerance: None,
            expected: Some(expected),
            resolution: resolution.to_vec(),
            passed: value == expected,
        }
    }
}

impl SuiteReport {
    pub fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.to_string(), status: Status::Passed, checks: Vec::new(), data: BTreeMap::new(), error: None }
    }

    pub fn skipped(suite: &str, reason: impl Into<String>) -> Self {
        SuiteReport { status: Status::Skipped, error: Some(reason.into()), ..SuiteReport::new(suite) }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn put<T: Serialize>(&mut self, key: &str, value: T) {
        self.data.insert(key.to_string(), to_value(value));
    }

    /// Marks the suite failed by an error raised during computation.
    pub fn fail(&mut self, e: &FolstabError) {
        self.error = Some(e.to_string());
    }

    /// Sets `status` from the checks and any captured error.
    pub fn finish(mut self) -> Self {
        if self.status != Status::Skipped {
            let ok = self.error.is_none() && self.checks.iter().all(|c| c.passed);
            self.status = if ok { Status::Passed } else { Status::Failed };
        }
        self
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// JSON value with non-finite floats mapped to `null`.
pub fn to_value<T: Serialize>(value: T) -> Value {
    serde_json::to_value(value).unwrap_or(Value::Null)
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let mut h = Sha256::new();
    for (k, v) in cfg.canonical() {
        h.update(format!("{k}={v}\n").as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new(cfg: &RunConfig, suites: Vec<SuiteReport>) -> Self {
        let passed = suites.iter().all(|s| s.status != Status::Failed);
        Report {
            schema: SCHEMA.to_string(),
            metadata: Metadata {
                version: env!("CARGO_PKG_VERSION").to_string(),
                config: cfg.canonical(),
                config_hash: config_hash(cfg),
                seed: cfg.seed,
                tolerance_scale: cfg.tolerance_scale,
            },
            suites,
            passed,
        }
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.suite == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text).map_err(|e| FolstabError::Input(format!("malformed report: {e}")))?;
        if r.schema != SCHEMA {
            return Err(FolstabError::Input(format!("unsupported report schema '{}' (expected {SCHEMA})", r.schema)));
        }
        Ok(r)
    }

    /// One row per check, then one row per eigenvalue of every reported
    /// spectrum (`kind = eigenvalue`, ascending by `index`).
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let num = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        w.write_record(["suite", "kind", "name", "index", "value", "relation", "tolerance", "resolution", "passed"])
            .expect("in-memory write");
        for s in &self.suites {
            for c in &s.checks {
                let relation = serde_json::to_value(c.relation).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
                let value = match (c.value, c.flag) {
                    (Some(v), _) => format!("{v:?}"),
                    (None, Some(f)) => f.to_string(),
                    _ => String::new(),
                };
                let tolerance = match c.expected {
                    Some(e) => e.to_string(),
                    None => num(c.tolerance),
                };
                let res: Vec<String> = c.resolution.iter().map(|r| r.to_string()).collect();
                w.write_record([&s.suite, "check", &c.name, "", &value, &relation, &tolerance, &res.join("x"), &c.passed.to_string()])
                    .expect("in-memory write");
            }
            if let Some(Value::Array(ev)) = s.data.get("eigenvalues") {
                let res = s.data.get("resolution").map(resolution_string).unwrap_or_default();
                for (i, l) in ev.iter().enumerate() {
                    let v = l.as_f64().map(|x| format!("{x:?}")).unwrap_or_default();
                    w.write_record([&s.suite, "eigenvalue", "jacobi", &i.to_string(), &v, "", "", &res, ""])
                        .expect("in-memory write");
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

fn resolution_string(v: &Value) -> String {
    match v {
        Value::Array(xs) => xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("x"),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_kv;

    fn sample() -> Report {
        let cfg = RunConfig::from_pairs(&parse_kv("space = round_sphere:n=3\nfoliation = hopf\nsuite = spectrum").unwrap()).unwrap();
        let mut s = SuiteReport::new("spectrum");
        s.check(Check::le("symmetry", 1e-14, 1e-10, &[8, 8, 8]));
        s.check(Check::flag("converged", true, true, &[8, 8, 8]));
        s.put("eigenvalues", vec![-3.0, 0.1 + 0.2, 5.5]);
        s.put("resolution", vec![8, 8, 8]);
        Report::new(&cfg, vec![s.finish()])
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = sample();
        let text = r.to_json();
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), text);
        assert!(text.contains("\"schema\": \"folstab-report/1\""));
    }

    #[test]
    fn non_finite_values_fail_and_serialize_as_null() {
        let c = Check::le("x", f64::NAN, 1.0, &[8]);
        assert!(!c.passed && c.value.is_none());
        let mut s = SuiteReport::new("lck");
        s.check(c);
        assert_eq!(s.finish().status, Status::Failed);
    }

    #[test]
    fn csv_lists_eigenvalues_in_order() {
        let csv = sample().to_csv();
        let rows: Vec<&str> = csv.lines().filter(|l| l.contains(",eigenvalue,")).collect();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].starts_with("spectrum,eigenvalue,jacobi,0,-3.0"));
        assert!(rows[1].contains(",0.30000000000000004,"));
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let text = sample().to_json().replace("folstab-report/1", "folstab-report/0");
        assert!(Report::from_json(&text).is_err());
    }

    #[test]
    fn hash_tracks_config() {
        let a = RunConfig::from_pairs(&parse_kv("seed = 1").unwrap()).unwrap();
        let b = RunConfig::from_pairs(&parse_kv("seed = 2").unwrap()).unwrap();
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
