use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ShotPlan;
use crate::{Error, Result};

/// Version of the JSON and CSV layouts written by [`ExperimentResult`].
pub const SCHEMA_VERSION: u32 = 1;

/// Flat record of one protocol run.
///
/// `columns`/`rows` hold one row per setting (the CSV body); `derived`
/// holds scalar outputs with their standard errors in `derived_se`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub protocol: String,
    pub plan: ShotPlan,
    /// Protocol inputs (phases, α grid, Fock levels, ...).
    pub settings: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub derived: BTreeMap<String, f64>,
    pub derived_se: BTreeMap<String, f64>,
    /// Largest truncation leakage seen during the run.
    pub leakage: f64,
    /// Resolved configuration, filled in by front ends for replay.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub config: Value,
}

impl ExperimentResult {
    pub fn new(protocol: &str, plan: ShotPlan, columns: &[&str]) -> Self {
        ExperimentResult {
            schema_version: SCHEMA_VERSION,
            protocol: protocol.to_string(),
            plan,
            settings: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            derived: BTreeMap::new(),
            derived_se: BTreeMap::new(),
            leakage: 0.0,
            config: Value::Null,
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn setting(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.settings.insert(key.to_string(), v);
        self
    }

    pub fn derive(&mut self, key: &str, value: f64, se: Option<f64>) -> &mut Self {
        self.derived.insert(key.to_string(), value);
        if let Some(se) = se {
            self.derived_se.insert(key.to_string(), se);
        }
        self
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    /// Header line then one line per row. Values use the shortest
    /// round-trip decimal form, so output is byte-stable.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_csv() {
        let mut r = ExperimentResult::new("demo", ShotPlan::sampled(10, 3), &["x", "p"]);
        r.push_row(vec![0.0, 0.5]);
        r.push_row(vec![1.5, 0.25]);
        r.setting("n", 3).derive("contrast", 0.9, Some(0.01));
        let back = ExperimentResult::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.to_csv(), "x,p\n0,0.5\n1.5,0.25\n");
        assert_eq!(r.column("p").unwrap(), vec![0.5, 0.25]);
    }
}
