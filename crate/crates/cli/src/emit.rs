//! CSV and JSON artifacts.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::config::Format;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every double
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(n: i64) -> Self {
        Cell::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Result of one command: a CSV table and a JSON body.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub command: String,
    pub parameters: Value,
    pub table: Table,
    pub result: Value,
    pub default_format: Format,
}

pub fn to_csv(table: &Table) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn to_json(artifact: &Artifact) -> Vec<u8> {
    let body = json!({
        "schema": SCHEMA_VERSION,
        "command": artifact.command,
        "parameters": artifact.parameters,
        "result": artifact.result,
    });
    let mut out = serde_json::to_vec_pretty(&body).expect("JSON values always serialize");
    out.push(b'\n');
    out
}

pub fn render(artifact: &Artifact, format: Format) -> std::io::Result<Vec<u8>> {
    match format {
        Format::Csv => to_csv(&artifact.table).map_err(std::io::Error::other),
        Format::Json => Ok(to_json(artifact)),
    }
}

pub fn write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    f.flush()
}
