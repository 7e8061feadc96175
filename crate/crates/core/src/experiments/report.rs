use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::fit::{fit_loglog_slope, SlopeFit};
use crate::config::write_atomic;
use crate::error::Result;
use crate::grid::io::csv_bytes;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            Value::Int(v) => Some(*v as f64),
            Value::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Value::Num(v) => format!("{v:e}"),
            Value::Int(v) => v.to_string(),
            Value::Text(s) => s.clone(),
        }
    }
}

fn short(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable form of the threshold, e.g. `>= 0.7`.
    pub bound: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fingerprint {
    pub crate_version: String,
    pub threads: usize,
    pub arch: String,
    pub os: String,
    pub spec_hash: String,
    pub lattice_hash: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub slopes: BTreeMap<String, SlopeFit>,
    pub checks: Vec<Check>,
    pub tolerances: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub pass: bool,
    pub fingerprint: Fingerprint,
    /// Solver logs keyed by run label.
    #[serde(skip)]
    pub logs: Vec<(String, String)>,
}

#[derive(Serialize)]
struct Summary<'a> {
    study: &'a str,
    kind: &'a str,
    pass: bool,
    slopes: &'a BTreeMap<String, SlopeFit>,
    tolerances: &'a BTreeMap<String, f64>,
    checks: &'a [Check],
    notes: &'a [String],
    fingerprint: &'a Fingerprint,
}

impl StudyReport {
    pub fn new(study: &str, kind: &str, columns: &[&str], fingerprint: Fingerprint) -> Self {
        Self {
            study: study.to_string(),
            kind: kind.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            slopes: BTreeMap::new(),
            checks: Vec::new(),
            tolerances: BTreeMap::new(),
            notes: Vec::new(),
            pass: true,
            fingerprint,
            logs: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    /// Fit `log y` against `log x` and record the result under `label`.
    pub fn fit(&mut self, label: &str, x: &[f64], y: &[f64]) -> Result<SlopeFit> {
        let pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
        let fit = fit_loglog_slope(&pairs)?;
        self.slopes.insert(label.to_string(), fit.clone());
        Ok(fit)
    }

    pub fn check(&mut self, name: &str, value: f64, bound: String, pass: bool) {
        self.pass &= pass;
        self.checks.push(Check {
            name: name.to_string(),
            value,
            bound,
            pass,
        });
    }

    pub fn check_min(&mut self, name: &str, value: f64, min: f64) {
        self.check(name, value, format!(">= {}", short(min)), value >= min);
    }

    pub fn check_max(&mut self, name: &str, value: f64, max: f64) {
        self.check(name, value, format!("<= {}", short(max)), value <= max);
    }

    pub fn tolerance(&mut self, key: &str, v: f64) {
        self.tolerances.insert(key.to_string(), v);
    }

    pub fn csv(&self) -> Result<Vec<u8>> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Value::render).collect())
            .collect();
        csv_bytes(&self.columns, &rows)
    }

    pub fn summary_json(&self) -> Result<String> {
        let s = Summary {
            study: &self.study,
            kind: &self.kind,
            pass: self.pass,
            slopes: &self.slopes,
            tolerances: &self.tolerances,
            checks: &self.checks,
            notes: &self.notes,
            fingerprint: &self.fingerprint,
        };
        Ok(serde_json::to_string_pretty(&s).expect("report serializes"))
    }

    /// Writes `<name>.csv`, `<name>.json` and `<name>.log` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.study));
        let json = dir.join(format!("{}.json", self.study));
        let log = dir.join(format!("{}.log", self.study));
        write_atomic(&csv, &self.csv()?)?;
        write_atomic(&json, self.summary_json()?.as_bytes())?;
        let mut text = String::new();
        for (label, body) in &self.logs {
            text.push_str(&format!("# {label}\n{body}"));
        }
        write_atomic(&log, text.as_bytes())?;
        Ok(vec![csv, json, log])
    }

    /// One line per check.
    pub fn check_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {}: {:.4e} (need {})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.bound
                )
            })
            .collect()
    }
}
