//! Tabular reports: CSV with a header row plus a JSON companion.
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces every value bit for bit. Non-finite floats are rejected.

use crate::error::{Result, ShrinkError};
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Int,
    Float,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub columns: Vec<Column>,
}

impl Schema {
    pub fn new(cols: &[(&str, ColumnKind)]) -> Self {
        Schema {
            columns: cols
                .iter()
                .map(|(n, k)| Column {
                    name: n.to_string(),
                    kind: *k,
                })
                .collect(),
        }
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }
}

/// One table cell. `Missing` is written as an empty field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub fn format_float(v: f64) -> Result<String> {
    if !v.is_finite() {
        return Err(ShrinkError::Report(format!("non-finite value {v} in report")));
    }
    Ok(format!("{v:.16e}"))
}

impl Cell {
    fn render(&self) -> Result<String> {
        Ok(match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(f) => format_float(*f)?,
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        })
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(f) => json!(f),
            Cell::Text(s) => json!(s),
            Cell::Missing => Value::Null,
        }
    }

    fn matches(&self, kind: ColumnKind) -> bool {
        matches!(
            (self, kind),
            (Cell::Missing, _)
                | (Cell::Int(_), ColumnKind::Int)
                | (Cell::Float(_), ColumnKind::Float)
                | (Cell::Text(_), ColumnKind::Text)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: Schema,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(schema: Schema) -> Self {
        Table {
            schema,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        self.check_row(&row)?;
        self.rows.push(row);
        Ok(())
    }

    fn check_row(&self, row: &[Cell]) -> Result<()> {
        if row.len() != self.schema.columns.len() {
            return Err(ShrinkError::Report(format!(
                "row has {} cells but the schema declares {} columns",
                row.len(),
                self.schema.columns.len()
            )));
        }
        for (cell, col) in row.iter().zip(&self.schema.columns) {
            if !cell.matches(col.kind) {
                return Err(ShrinkError::Report(format!(
                    "cell {cell:?} does not fit column `{}` of kind {:?}",
                    col.name, col.kind
                )));
            }
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.schema.columns.iter().position(|c| c.name == name)
    }

    /// Float values of a column; missing cells are skipped.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(j) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| match r[j] {
                Cell::Float(v) => Some(v),
                Cell::Int(v) => Some(v as f64),
                _ => None,
            })
            .collect()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.schema.names()).map_err(csv_err)?;
        for row in &self.rows {
            self.check_row(row)?;
            let fields = row.iter().map(Cell::render).collect::<Result<Vec<_>>>()?;
            w.write_record(&fields).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| ShrinkError::Report(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| ShrinkError::Report(e.to_string()))
    }

    pub fn from_csv_str(text: &str, schema: &Schema) -> Result<Table> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().map_err(csv_err)?.clone();
        let names: Vec<&str> = header.iter().collect();
        if names != schema.names() {
            return Err(ShrinkError::Report(format!(
                "header {names:?} does not match schema {:?}",
                schema.names()
            )));
        }
        let mut table = Table::new(schema.clone());
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let row = rec
                .iter()
                .zip(&schema.columns)
                .map(|(field, col)| parse_cell(field, col))
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, col) in r.iter().zip(&self.schema.columns) {
                    m.insert(col.name.clone(), c.to_json());
                }
                Value::Object(m)
            })
            .collect();
        json!({ "columns": self.schema.names(), "rows": rows })
    }
}

fn csv_err(e: csv::Error) -> ShrinkError {
    ShrinkError::Report(e.to_string())
}

fn parse_cell(field: &str, col: &Column) -> Result<Cell> {
    if field.is_empty() && col.kind != ColumnKind::Text {
        return Ok(Cell::Missing);
    }
    let bad = |e: String| ShrinkError::Report(format!("column `{}`: {e}", col.name));
    Ok(match col.kind {
        ColumnKind::Int => Cell::Int(field.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?),
        ColumnKind::Float => Cell::Float(field.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?),
        ColumnKind::Text => Cell::Text(field.to_string()),
    })
}

fn io_err(path: &Path, e: std::io::Error) -> ShrinkError {
    ShrinkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes `<stem>.csv` and `<stem>.json`; `summary` is merged into the JSON.
pub fn write_report(table: &Table, summary: Value, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let csv_path = stem.with_extension("csv");
    let json_path = stem.with_extension("json");
    let text = table.to_csv_string()?;
    let mut doc = table.to_json();
    if let (Value::Object(d), Value::Object(s)) = (&mut doc, summary) {
        d.insert("summary".into(), Value::Object(s));
    }
    std::fs::write(&csv_path, text).map_err(|e| io_err(&csv_path, e))?;
    let body = serde_json::to_string_pretty(&doc).map_err(|e| ShrinkError::Report(e.to_string()))?;
    std::fs::write(&json_path, body + "\n").map_err(|e| io_err(&json_path, e))?;
    Ok((csv_path, json_path))
}

pub fn read_csv(path: &Path, schema: &Schema) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Table::from_csv_str(&text, schema)
}
