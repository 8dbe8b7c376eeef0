//! Rendering of experiment results as JSON or CSV.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Everything a subcommand produces.
#[derive(Debug, Default, Serialize)]
pub struct Report {
    pub config: Value,
    pub results: Vec<Value>,
    pub violations: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
}

impl Report {
    pub fn push_result<T: Serialize>(&mut self, row: &T) {
        self.results.push(serde_json::to_value(row).expect("results serialize"));
    }

    pub fn push_violation<T: Serialize>(&mut self, v: &T) {
        self.violations
            .push(serde_json::to_value(v).expect("violations serialize"));
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)
            }
            Format::Csv => write_csv(&self.results, out),
        }
    }
}

/// Flattens nested objects into dotted keys. Arrays become `;`-joined cells and
/// `null` (including non-finite floats) becomes an empty cell.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, child) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, child, out);
                }
            }
            Value::Array(items) => {
                let cells: Vec<String> = items.iter().map(scalar).collect();
                out.push((prefix.to_string(), cells.join(";")));
            }
            other => out.push((prefix.to_string(), scalar(other))),
        }
    }
    fn scalar(v: &Value) -> String {
        match v {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            Value::Object(_) | Value::Array(_) => v.to_string(),
            other => other.to_string(),
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}

fn write_csv(rows: &[Value], out: &mut dyn Write) -> std::io::Result<()> {
    let flat: Vec<Map<String, Value>> = rows
        .iter()
        .map(|r| flatten(r).into_iter().map(|(k, v)| (k, Value::String(v))).collect())
        .collect();
    let mut columns: Vec<String> = Vec::new();
    for row in &flat {
        for k in row.keys() {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&columns)?;
    for row in &flat {
        w.write_record(columns.iter().map(|c| row.get(c).and_then(Value::as_str).unwrap_or("")))?;
    }
    w.flush()
}
