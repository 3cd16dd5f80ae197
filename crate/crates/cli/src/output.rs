//! Deterministic artifacts: CSV tables plus `manifest.json`.

use std::fs;
use std::path::Path;

use nama::scalar::{format_rational, Rational};
use serde_json::{Map, Value};

/// Shortest decimal that parses back to the same `f64`.
pub fn float(v: f64) -> String {
    format!("{v:?}")
}

pub fn rational(q: &Rational) -> String {
    format_rational(q)
}

pub fn join_ids(ids: &[usize]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, header: Vec<String>) -> Table {
        Table { file: file.to_string(), header, rows: Vec::new() }
    }

    pub fn with_columns(file: &str, header: &[&str]) -> Table {
        Table::new(file, header.iter().map(|s| s.to_string()).collect())
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.file);
        self.rows.push(row);
    }

    fn render(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
    }
}

/// Coordinate column names `x0, x1, ..`.
pub fn coord_columns(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|k| format!("{prefix}{k}")).collect()
}

/// Everything a command produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    /// Resolved configuration echoed into the manifest.
    pub config: Map<String, Value>,
    pub tables: Vec<Table>,
    pub summary: Map<String, Value>,
    pub pass: bool,
    /// One line for stdout.
    pub message: String,
}

impl Report {
    pub fn new(command: &str, config: Map<String, Value>) -> Report {
        Report {
            command: command.to_string(),
            config,
            tables: Vec::new(),
            summary: Map::new(),
            pass: true,
            message: String::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn write(&self, out: &Path) -> std::io::Result<()> {
        fs::create_dir_all(out)?;
        let mut outputs = Vec::new();
        for t in &self.tables {
            let bytes = t.render().map_err(std::io::Error::other)?;
            fs::write(out.join(&t.file), bytes)?;
            outputs.push(Value::from(t.file.clone()));
        }
        let mut manifest = Map::new();
        manifest.insert("command".into(), self.command.clone().into());
        manifest.insert("config".into(), Value::Object(self.config.clone()));
        manifest.insert("outputs".into(), Value::Array(outputs));
        manifest.insert("status".into(), if self.pass { "pass" } else { "fail" }.into());
        manifest.insert("summary".into(), Value::Object(self.summary.clone()));
        manifest.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        let mut text = serde_json::to_string_pretty(&Value::Object(manifest))?;
        text.push('\n');
        fs::write(out.join("manifest.json"), text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0, 1e-20, 123456789.125, -2.5e300] {
            assert_eq!(float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(float(0.1), "0.1");
    }

    #[test]
    fn cells_with_commas_are_quoted() {
        let mut t = Table::with_columns("a.csv", &["k", "v"]);
        t.push(vec!["(L^1 . E_[0, 1])".into(), "1/2".into()]);
        let text = String::from_utf8(t.render().unwrap()).unwrap();
        assert_eq!(text, "k,v\n\"(L^1 . E_[0, 1])\",1/2\n");
    }
}
