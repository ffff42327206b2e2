//! Run reports and their JSON and CSV serializations.

use std::collections::BTreeMap;
use std::io::Write;

use chernloc::geometry::ConvergenceRow;
use chernloc::oddchern::DegreeResult;
use chernloc::C64;
use serde::{Deserialize, Serialize};

/// Exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    OracleMismatch,
    Unconverged,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::OracleMismatch => 2,
            Status::Unconverged => 3,
        }
    }
}

/// A computed number; complex values serialize as `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Value {
    pub name: String,
    pub value: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rounded: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub resolution: Vec<usize>,
    pub value: [f64; 2],
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub rows: Vec<Row>,
}

/// Whether the check counts as a convergence check (exit 3) or an oracle
/// check (exit 2) when it fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Convergence,
    Oracle,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub config: BTreeMap<String, String>,
    pub values: Vec<Value>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub status: Status,
}

pub fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl RunReport {
    pub fn new(scenario: &str, config: BTreeMap<String, String>) -> Self {
        Self {
            tool: "chernloc".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            scenario: scenario.into(),
            config,
            values: Vec::new(),
            tables: Vec::new(),
            checks: Vec::new(),
            status: Status::Pass,
        }
    }

    pub fn value(&mut self, name: &str, z: C64) {
        self.values.push(Value {
            name: name.into(),
            value: pair(z),
            rounded: None,
            residual: None,
        });
    }

    pub fn integer(&mut self, name: &str, z: C64, rounded: i64, residual: f64) {
        self.values.push(Value {
            name: name.into(),
            value: pair(z),
            rounded: Some(rounded),
            residual: finite(residual),
        });
    }

    pub fn degree(&mut self, name: &str, d: &DegreeResult) {
        self.integer(name, d.value, d.rounded, d.residual);
        self.table(name, &d.convergence);
    }

    pub fn table(&mut self, name: &str, rows: &[ConvergenceRow]) {
        self.tables.push(Table {
            name: name.into(),
            rows: rows
                .iter()
                .map(|r| Row {
                    resolution: r.resolution.clone(),
                    value: pair(r.value),
                    delta: r.delta.and_then(finite),
                })
                .collect(),
        });
    }

    pub fn raw_table(&mut self, table: Table) {
        self.tables.push(table);
    }

    pub fn check(&mut self, name: &str, kind: CheckKind, passed: bool, measured: f64, tolerance: f64, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            kind,
            passed,
            measured: finite(measured),
            tolerance: finite(tolerance),
            detail: detail.into(),
        });
    }

    /// `measured < tolerance`.
    pub fn bound(&mut self, name: &str, kind: CheckKind, measured: f64, tolerance: f64) {
        self.check(name, kind, measured < tolerance, measured, tolerance, "");
    }

    /// Sets the status from the checks: unconverged wins over an oracle
    /// mismatch.
    pub fn finish(mut self) -> Self {
        let failed = |k: CheckKind| self.checks.iter().any(|c| c.kind == k && !c.passed);
        self.status = if failed(CheckKind::Convergence) {
            Status::Unconverged
        } else if failed(CheckKind::Oracle) {
            Status::OracleMismatch
        } else {
            Status::Pass
        };
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Convergence tables as `table,resolution,re,im,delta` rows, with the
    /// resolution written as `n1xn2x…`.
    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["table", "resolution", "re", "im", "delta"])?;
        for t in &self.tables {
            for r in &t.rows {
                let res = r.resolution.iter().map(ToString::to_string).collect::<Vec<_>>().join("x");
                let delta = r.delta.map(|d| d.to_string()).unwrap_or_default();
                w.write_record([t.name.clone(), res, r.value[0].to_string(), r.value[1].to_string(), delta])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_tables_give_a_header() {
        let r = RunReport::new("deg", BTreeMap::new());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "table,resolution,re,im,delta\n");
    }

    #[test]
    fn json_round_trips_bitwise() {
        let mut r = RunReport::new("deg", BTreeMap::from([("n".to_string(), "1".to_string())]));
        r.integer("deg", C64::new(-0.1 - 0.2 - 1.7, 1e-300), -2, 0.30000000000000004);
        r.table(
            "deg",
            &[ConvergenceRow {
                resolution: vec![32],
                value: C64::new(std::f64::consts::PI, -0.0),
                delta: Some(1.0 / 3.0),
            }],
        );
        let r = r.finish();
        let back = RunReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.values[0].value[0].to_bits(), r.values[0].value[0].to_bits());
        assert_eq!(back.to_json(), r.to_json());
    }

    #[test]
    fn status_priorities() {
        let mut r = RunReport::new("deg", BTreeMap::new());
        r.bound("oracle", CheckKind::Oracle, 1.0, 0.5);
        assert_eq!(r.clone().finish().status, Status::OracleMismatch);
        r.bound("ladder", CheckKind::Convergence, 1.0, 0.5);
        assert_eq!(r.finish().status.exit_code(), 3);
    }
}
