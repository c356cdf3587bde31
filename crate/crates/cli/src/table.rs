//! Tabular output shared by every subcommand.
//!
//! CSV: `#`-prefixed metadata lines, a header row, comma separators, floats
//! with 17 significant digits. JSON: `{"meta": {...}, "rows": [...]}` with
//! keys in insertion order and floats in shortest round-trip form.

use std::fmt::Write as _;

use serde_json::{Map, Number, Value};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Floats(Vec<f64>),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// Fixed 17-significant-digit rendering used in CSV.
pub fn format_float_csv(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Null => String::new(),
        Cell::Bool(b) => b.to_string(),
        Cell::Int(i) => i.to_string(),
        Cell::Float(f) => format_float_csv(*f),
        Cell::Str(s) => s.clone(),
        Cell::Floats(v) => v.iter().map(|f| format_float_csv(*f)).collect::<Vec<_>>().join(";"),
    }
}

fn json_value(cell: &Cell) -> Value {
    match cell {
        Cell::Null => Value::Null,
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Int(i) => Value::Number((*i).into()),
        Cell::Float(f) => Number::from_f64(*f).map(Value::Number).unwrap_or(Value::Null),
        Cell::Str(s) => Value::String(s.clone()),
        Cell::Floats(v) => Value::Array(
            v.iter()
                .map(|f| Number::from_f64(*f).map(Value::Number).unwrap_or(Value::Null))
                .collect(),
        ),
    }
}

fn cell_from_json(v: &Value) -> Result<Cell, CliError> {
    Ok(match v {
        Value::Null => Cell::Null,
        Value::Bool(b) => Cell::Bool(*b),
        Value::Number(n) => match n.as_i64() {
            Some(i) if !n.is_f64() => Cell::Int(i),
            _ => Cell::Float(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => Cell::Str(s.clone()),
        Value::Array(items) => Cell::Floats(
            items
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| CliError::invalid("non-numeric list entry in JSON table"))
                })
                .collect::<Result<_, _>>()?,
        ),
        Value::Object(_) => return Err(CliError::invalid("nested objects are not valid table cells")),
    })
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, with_meta: bool) -> String {
        let mut out = String::new();
        if with_meta {
            for (k, v) in &self.meta {
                let _ = writeln!(out, "# {k}: {v}");
            }
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(csv_field)).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&body).expect("fields are UTF-8"));
        out
    }

    pub fn to_json(&self, with_meta: bool) -> String {
        let mut meta = Map::new();
        if with_meta {
            for (k, v) in &self.meta {
                meta.insert(k.clone(), Value::String(v.clone()));
            }
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (c, cell) in self.columns.iter().zip(row) {
                    obj.insert(c.clone(), json_value(cell));
                }
                Value::Object(obj)
            })
            .collect();
        let mut top = Map::new();
        top.insert("meta".into(), Value::Object(meta));
        top.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("serializable");
        s.push('\n');
        s
    }

    /// Reads a table previously written by [`Table::to_json`].
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let v: Value = serde_json::from_str(text).map_err(|e| CliError::invalid(format!("bad JSON table: {e}")))?;
        let obj = v
            .as_object()
            .ok_or_else(|| CliError::invalid("JSON table must be an object"))?;
        let mut table = Table::default();
        if let Some(meta) = obj.get("meta").and_then(Value::as_object) {
            for (k, v) in meta {
                let s = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                table.meta.push((k.clone(), s));
            }
        }
        let rows = obj
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::invalid("JSON table lacks a rows array"))?;
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_object()
                .ok_or_else(|| CliError::invalid(format!("row {i} is not an object")))?;
            if i == 0 {
                table.columns = row.keys().cloned().collect();
            } else if !row.keys().eq(table.columns.iter()) {
                return Err(CliError::invalid(format!("row {i} has different columns")));
            }
            table
                .rows
                .push(row.values().map(cell_from_json).collect::<Result<_, _>>()?);
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(["n", "branch", "omega", "roots", "passed", "error"]);
        t.meta.push(("command".into(), "spectrum".into()));
        t.push(vec![
            1u32.into(),
            "+".into(),
            2.4721359549995796.into(),
            Cell::Floats(vec![1.0, 0.1]),
            true.into(),
            Cell::Null,
        ]);
        t.push(vec![
            2u32.into(),
            "-".into(),
            (-4.0f64).into(),
            Cell::Floats(vec![]),
            false.into(),
            "a, b".into(),
        ]);
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv(true);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# command: spectrum");
        assert_eq!(lines[1], "n,branch,omega,roots,passed,error");
        assert_eq!(
            lines[2],
            "1,+,2.4721359549995796e0,1.0000000000000000e0;1.0000000000000001e-1,true,"
        );
        assert_eq!(lines[3], "2,-,-4.0000000000000000e0,,false,\"a, b\"");
        assert!(!sample().to_csv(false).starts_with('#'));
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let t = sample();
        let text = t.to_json(true);
        let back = Table::from_json(&text).unwrap();
        assert_eq!(back.to_json(true), text);
        assert_eq!(back.rows[0][2], Cell::Float(2.4721359549995796));
        assert_eq!(back.rows[1][2], Cell::Float(-4.0));
        assert_eq!(back.rows[0][0], Cell::Int(1));
    }

    #[test]
    fn json_key_order_is_stable() {
        let text = sample().to_json(false);
        let n = text.find("\"n\"").unwrap();
        let b = text.find("\"branch\"").unwrap();
        let o = text.find("\"omega\"").unwrap();
        assert!(n < b && b < o);
        assert!(text.contains("\"meta\": {}"));
    }
}
