//! Result documents and their JSON/CSV renderings.

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use crate::specfile::WalkSpecFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub command: &'static str,
    pub quantity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<WalkSpecFile>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub parameters: Value,
    pub provenance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub values: Value,
}

/// Flat form of the values for CSV.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// `f64` as text that parses back to the same bits.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub struct Rendered {
    pub doc: ResultDocument,
    pub table: Table,
}

impl Rendered {
    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(&self.doc)? + "\n"),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.table.columns)?;
                for row in &self.table.rows {
                    w.write_record(row)?;
                }
                Ok(String::from_utf8(w.into_inner()?)?)
            }
        }
    }
}

/// `[{"state": n, "value": v}, …]` and the matching two-column table.
pub fn state_vector(rows: &[(i64, f64)]) -> (Value, Table) {
    let mut table = Table::new(&["state", "value"]);
    let values = rows
        .iter()
        .map(|&(n, v)| {
            table.push(vec![n.to_string(), num(v)]);
            json!({ "state": n, "value": v })
        })
        .collect();
    (Value::Array(values), table)
}

pub fn scalar(name: &str, v: f64) -> (Value, Table) {
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec![name.to_string(), num(v)]);
    (json!(v), table)
}

/// Named scalar fields, as an object and as `key,value` rows.
pub fn record(fields: &[(&str, f64)]) -> (Value, Table) {
    let mut table = Table::new(&["key", "value"]);
    let mut obj = serde_json::Map::new();
    for &(k, v) in fields {
        table.push(vec![k.to_string(), num(v)]);
        obj.insert(k.to_string(), json!(v));
    }
    (Value::Object(obj), table)
}
