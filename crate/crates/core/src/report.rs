//! Canonical report emission: JSON with sorted keys and 17-significant-digit
//! floats, or CSV with one record per row.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

/// 17 significant digits in scientific notation; non-finite values become
/// `inf`, `-inf` or `nan`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Reads a number written by [`fmt_float`] or by serde.
pub fn json_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

/// serde helper for floats that may be infinite.
pub fn serialize_extended_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&fmt_float(*x))
    }
}

pub fn serialize_extended_f64_vec<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        if x.is_finite() {
            seq.serialize_element(x)?;
        } else {
            seq.serialize_element(&fmt_float(*x))?;
        }
    }
    seq.end()
}

/// Writes `value` with object keys in sorted order, no whitespace, and every
/// non-integer number through [`fmt_float`].
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_canonical(value, &mut out);
    out
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else {
                out.push_str(&fmt_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
    }
}

/// Flat table view of a report.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let line = |cells: &[String], out: &mut String| {
            let escaped: Vec<String> = cells.iter().map(|c| escape_csv(c)).collect();
            out.push_str(&escaped.join(","));
            out.push('\n');
        };
        line(&self.header, &mut out);
        for row in &self.rows {
            line(row, &mut out);
        }
        out
    }
}

fn escape_csv(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Anything the CLI can emit.
pub trait Report: Serialize {
    fn csv(&self) -> CsvTable;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Parse(format!("format `{other}` (expected json or csv)"))),
        }
    }
}

/// Report body wrapped with the run configuration and crate version.
pub fn envelope<R: Report>(command: &str, config: Value, report: &R) -> Result<Value> {
    let body = serde_json::to_value(report).map_err(|e| Error::InvalidInput(format!("report serialisation: {e}")))?;
    let mut map = serde_json::Map::new();
    map.insert("command".into(), Value::String(command.into()));
    map.insert("config".into(), config);
    map.insert("report".into(), body);
    map.insert("version".into(), Value::String(crate::VERSION.into()));
    Ok(Value::Object(map))
}

pub fn render<R: Report>(command: &str, config: Value, report: &R, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => {
            let mut s = canonical_json(&envelope(command, config, report)?);
            s.push('\n');
            s
        }
        Format::Csv => report.csv().render(),
    })
}

/// Renders and writes to `path`, or stdout when `path` is `None`.
pub fn emit_report<R: Report>(
    command: &str,
    config: Value,
    report: &R,
    format: Format,
    path: Option<&Path>,
) -> Result<()> {
    let text = render(command, config, report, format)?;
    write_output(path, &text)
}

pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_use_seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!("1.0000000000000001e-1".parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn canonical_json_sorts_keys() {
        let v = json!({"b": 1, "a": [0.5, {"z": true, "y": null}], "c": "x,y"});
        let s = canonical_json(&v);
        assert_eq!(s, r#"{"a":[5.0000000000000000e-1,{"y":null,"z":true}],"b":1,"c":"x,y"}"#);
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"][0].as_f64(), Some(0.5));
    }

    #[test]
    fn csv_escapes_cells() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,\"y\"".into()]);
        assert_eq!(t.render(), "a,b\n1,\"x,\"\"y\"\"\"\n");
    }
}
