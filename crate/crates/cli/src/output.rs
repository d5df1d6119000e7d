//! CSV tables and the run manifest.

use std::path::Path;

use hqrc_core::Error as CoreError;
use serde::Serialize;

use crate::error::CliError;

/// A CSV table built in memory and written in one go.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// One CSV cell.
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends a row; non-finite numbers are a numerical failure.
    pub fn push(&mut self, cells: Vec<Cell>) -> Result<(), CliError> {
        if cells.len() != self.header.len() {
            return Err(CliError::Core(CoreError::Argument(format!(
                "row has {} cells, table has {} columns",
                cells.len(),
                self.header.len()
            ))));
        }
        let mut row = Vec::with_capacity(cells.len());
        for (cell, name) in cells.into_iter().zip(&self.header) {
            row.push(match cell {
                Cell::Num(x) if !x.is_finite() => {
                    return Err(CliError::Core(CoreError::Numerical(format!("column {name} got {x}"))));
                }
                Cell::Num(x) => format!("{x}"),
                Cell::Int(n) => n.to_string(),
                Cell::Text(s) => s,
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds a row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => {
        vec![$($crate::output::Cell::from($x)),*]
    };
}

/// What an experiment produced: named tables plus summary metrics for the manifest.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<(String, Table)>,
    pub metrics: serde_json::Map<String, serde_json::Value>,
}

impl Outcome {
    pub fn table(&mut self, name: &str, t: Table) {
        self.tables.push((name.to_string(), t));
    }

    pub fn metric<V: Serialize>(&mut self, key: &str, v: V) {
        self.metrics.insert(key.to_string(), serde_json::to_value(v).expect("metric serializes"));
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub status: String,
    pub failure: Option<String>,
    pub code_version: String,
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub workers: usize,
    pub outputs: Vec<String>,
    pub metrics: serde_json::Map<String, serde_json::Value>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    /// Writes `manifest.json` via a temporary file and a rename.
    pub fn write_atomic(&self, dir: &Path) -> Result<(), CliError> {
        let tmp = dir.join("manifest.json.tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        std::fs::rename(&tmp, dir.join("manifest.json"))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_must_match_and_be_finite() {
        let mut t = Table::new(&["a", "b"]);
        t.push(crate::row![1.5, 2usize]).unwrap();
        assert!(t.push(crate::row![1.0]).is_err());
        let err = t.push(crate::row![f64::NAN, 1usize]).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn written_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["name", "x"]);
        t.push(crate::row!["a,b", 0.1]).unwrap();
        let path = dir.path().join("t.csv");
        t.write(&path).unwrap();
        assert_eq!(std::fs::read_to_string(path).unwrap(), "name,x\n\"a,b\",0.1\n");
    }
}
