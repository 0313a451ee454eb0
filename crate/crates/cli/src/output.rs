//! CSV tables and JSON reports.

use std::fmt;
use std::path::Path;

use awq_core::dynamics::TimeSeries;
use serde_json::Value;

use crate::Failure;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Debug on f64 is the shortest string that parses back exactly, with an
            // exponent for very large or small magnitudes
            Cell::Num(x) => write!(f, "{x:?}"),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Empty => Ok(()),
        }
    }
}

impl Cell {
    /// Integral axis values print as integers, so `chain.n` reads 100, not 100.0.
    pub fn axis_value(x: f64) -> Self {
        if x.fract() == 0.0 && x.abs() < 9e15 {
            Cell::Int(x as i64)
        } else {
            Cell::Num(x)
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn from_series(series: &TimeSeries) -> Self {
        let mut header = vec!["t".to_string()];
        header.extend(series.columns.iter().map(|(name, _)| name.clone()));
        let rows = series
            .times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                std::iter::once(Cell::Num(t))
                    .chain(series.columns.iter().map(|(_, v)| Cell::Num(v[i])))
                    .collect()
            })
            .collect();
        Self { header, rows }
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let io = |e: csv::Error| Failure::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string)).map_err(io)?;
        }
        w.flush().map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    }
}

/// Everything one command produces.
#[derive(Debug, Clone, Default)]
pub struct Artifact {
    pub table: Table,
    /// Command-specific report body.
    pub report: Value,
    /// Extra CSV files as (file suffix, table), e.g. ("_nu241", series).
    pub extra: Vec<(String, Table)>,
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}
