//! Reports: a list of flat rows plus run-level summary fields.

use std::io::{self, Write};

use pam_core::{LogValue, PamError};
use serde_json::{json, Map, Value};

use crate::config::RunConfig;

pub type Row = Map<String, Value>;

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub inputs: RunConfig,
    pub rows: Vec<Row>,
    pub summary: Row,
}

impl Report {
    pub fn new(inputs: RunConfig) -> Self {
        Report {
            inputs,
            rows: Vec::new(),
            summary: Map::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.inputs.command.name(),
            "inputs": self.inputs,
            "results": self.rows,
            "summary": self.summary,
        })
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json())?;
        writeln!(w)
    }

    /// One line per row; summary fields are repeated as trailing columns.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let Some(first) = self.rows.first() else {
            let header: Vec<&str> = self.summary.keys().map(String::as_str).collect();
            writeln!(w, "{}", header.join(","))?;
            let cells: Vec<String> = self.summary.values().map(cell).collect();
            return writeln!(w, "{}", cells.join(","));
        };
        let mut header: Vec<&str> = first.keys().map(String::as_str).collect();
        header.extend(self.summary.keys().map(String::as_str));
        writeln!(w, "{}", header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .values()
                .chain(self.summary.values())
                .map(cell)
                .collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) if !n.is_f64() => i.to_string(),
            (_, Some(u), _) if !n.is_f64() => u.to_string(),
            (_, _, Some(f)) => format!("{f:.16e}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

pub fn put_f64(row: &mut Row, key: &str, v: f64) -> Result<(), PamError> {
    if !v.is_finite() {
        return Err(PamError::Domain(format!(
            "{key} = {v} is not representable; rerun with --log-scale"
        )));
    }
    row.insert(key.to_string(), json!(v));
    Ok(())
}

/// Writes `key` as a plain number, or `log_key` and `sign_key` in log mode.
pub fn put_value(row: &mut Row, key: &str, v: LogValue, log_scale: bool) -> Result<(), PamError> {
    if log_scale {
        row.insert(format!("log_{key}"), json!(v.log_abs()));
        row.insert(format!("sign_{key}"), json!(v.sign()));
        Ok(())
    } else {
        put_f64(row, key, v.to_f64())
    }
}

pub fn put(row: &mut Row, key: &str, v: impl Into<Value>) {
    row.insert(key.to_string(), v.into());
}
