//! Machine-readable reports.
//!
//! Keys are sorted, arbitrary-precision integers are decimal strings and
//! reals carry 12 significant digits, so identical inputs give identical
//! bytes.

use std::fmt::Write as _;

use serde_json::{Map, Number, Value};

use crate::config::Format;

/// A real as a JSON number rounded to 12 significant digits; non-finite
/// values become strings.
pub fn real(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        });
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap();
    // -0 prints as "-0.0"
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    Value::Number(Number::from_f64(rounded).unwrap())
}

/// An integer of any size as a decimal string.
pub fn int(x: impl ToString) -> Value {
    Value::String(x.to_string())
}

/// One line of the per-n orbit table used for CSV output. Sizes are
/// decimal digit counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitRow {
    pub n: usize,
    pub value_digits: u64,
    pub a_digits: u64,
    pub primitive: bool,
    pub p_digits: u64,
    pub n_digits: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub result: Value,
    pub warnings: Vec<String>,
    pub table: Option<Vec<OrbitRow>>,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Report {
            command: command.to_string(),
            config,
            result: Value::Object(Map::new()),
            warnings: Vec::new(),
            table: None,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut top = Map::new();
        top.insert("command".into(), Value::String(self.command.clone()));
        top.insert("config".into(), self.config.clone());
        top.insert("result".into(), self.result.clone());
        top.insert(
            "warnings".into(),
            Value::Array(self.warnings.iter().cloned().map(Value::String).collect()),
        );
        Value::Object(top)
    }

    /// Renders in `format`. CSV is only defined for orbit tables.
    pub fn render(&self, format: Format) -> Result<String, String> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).unwrap();
                s.push('\n');
                Ok(s)
            }
            Format::Text => {
                let mut s = String::new();
                text(&mut s, 0, &self.to_json());
                Ok(s)
            }
            Format::Csv => {
                let rows = self
                    .table
                    .as_ref()
                    .ok_or_else(|| format!("csv output is not available for {}", self.command))?;
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record([
                    "n",
                    "value_digits",
                    "a_digits",
                    "primitive",
                    "p_digits",
                    "n_digits",
                ])
                .unwrap();
                for r in rows {
                    w.write_record([
                        r.n.to_string(),
                        r.value_digits.to_string(),
                        r.a_digits.to_string(),
                        r.primitive.to_string(),
                        r.p_digits.to_string(),
                        r.n_digits.to_string(),
                    ])
                    .unwrap();
                }
                Ok(String::from_utf8(w.into_inner().unwrap()).unwrap())
            }
        }
    }
}

fn text(out: &mut String, indent: usize, v: &Value) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                match v {
                    Value::Object(inner) if !inner.is_empty() => {
                        let _ = writeln!(out, "{pad}{k}:");
                        text(out, indent + 1, v);
                    }
                    Value::Array(items) if items.iter().any(|i| i.is_object()) => {
                        let _ = writeln!(out, "{pad}{k}:");
                        for (i, item) in items.iter().enumerate() {
                            let _ = writeln!(out, "{pad}  [{i}]");
                            text(out, indent + 2, item);
                        }
                    }
                    _ => {
                        let _ = writeln!(out, "{pad}{k}: {}", scalar(v));
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other));
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            format!("[{}]", parts.join(", "))
        }
        Value::Object(m) if m.is_empty() => "{}".into(),
        other => other.to_string(),
    }
}
