//! Experiment reports: one table of results plus named pass/fail checks,
//! rendered as CSV or JSON.

use std::fmt::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Empty => String::new(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            // JSON has no infinities; keep them readable.
            Cell::Num(v) => json!(v.to_string()),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(v) => json!(v),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }
}

/// Coordinate column names `prefix1..prefixN`.
pub fn coordinate_columns(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}{i}")).collect()
}

/// A statistic compared against a threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    /// The check passes when `statistic` compares as `relation` to `threshold`.
    pub relation: &'static str,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `statistic < threshold`.
    pub fn below(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            relation: "<",
            threshold,
            pass: statistic < threshold,
        }
    }

    /// Passes when `statistic <= threshold`.
    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            relation: "<=",
            pass: statistic <= threshold,
            ..Self::below(name, statistic, threshold)
        }
    }

    /// Passes when `statistic >= threshold`.
    pub fn at_least(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            relation: ">=",
            pass: statistic >= threshold,
            ..Self::below(name, statistic, threshold)
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "[{}] {}: {} {} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.statistic,
            self.relation,
            self.threshold
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: &'static str,
    /// Resolved configuration as embedded (see [`RunConfig::for_report`]).
    pub config: RunConfig,
    pub table: Table,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.table.columns.join(",");
        out.push('\n');
        for row in &self.table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .table
            .rows
            .iter()
            .map(|row| {
                let map = self
                    .table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.clone(), v.json()))
                    .collect::<serde_json::Map<_, _>>();
                Value::Object(map)
            })
            .collect();
        let doc = json!({
            "command": self.command,
            "config": self.config,
            "results": rows,
            "checks": self.checks,
            "pass": self.passed(),
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut table = Table::new(["name", "value", "n"]);
        table.push(vec!["a,b".into(), 0.1.into(), 3u64.into()]);
        table.push(vec!["c".into(), Cell::Empty, 4u64.into()]);
        Report {
            command: "solve",
            config: RunConfig::default(),
            table,
            checks: vec![Check::below("z", 1.0, 4.0), Check::at_least("p", 0.9, 0.95)],
        }
    }

    #[test]
    fn csv_layout() {
        assert_eq!(sample().to_csv(), "name,value,n\n\"a,b\",0.1,3\nc,,4\n");
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["results"][0]["value"], json!(0.1));
        assert_eq!(v["results"][1]["value"], Value::Null);
        assert_eq!(v["checks"][1]["pass"], json!(false));
        assert_eq!(v["pass"], json!(false));
    }

    #[test]
    fn check_relations() {
        assert!(Check::below("x", 3.9, 4.0).pass);
        assert!(!Check::below("x", 4.0, 4.0).pass);
        assert!(Check::at_most("x", 4.0, 4.0).pass);
        assert!(Check::at_least("x", 0.95, 0.95).pass);
        assert_eq!(Check::below("z", 1.0, 4.0).summary(), "[PASS] z: 1 < 4");
    }
}
