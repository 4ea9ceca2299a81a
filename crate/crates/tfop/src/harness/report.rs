use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use super::config::{ExperimentConfig, Format};
use crate::error::{Error, Result};

/// One scalar check: `pass` iff `value` meets `tolerance` in the direction
/// given by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// What the check establishes, in words.
    pub anchor: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Passes when `value < tolerance` (discrepancies).
    pub fn below(name: &str, anchor: &str, value: f64, tolerance: f64) -> Self {
        CheckRecord { name: name.into(), anchor: anchor.into(), value, tolerance, pass: value.is_finite() && value < tolerance }
    }

    /// Passes when `value >= -tolerance` (slacks).
    pub fn slack(name: &str, anchor: &str, value: f64, tolerance: f64) -> Self {
        CheckRecord { name: name.into(), anchor: anchor.into(), value, tolerance, pass: value.is_finite() && value >= -tolerance }
    }

    /// Passes when `value == expected` exactly; `tolerance` records the expected value.
    pub fn exact(name: &str, anchor: &str, value: f64, expected: f64) -> Self {
        CheckRecord { name: name.into(), anchor: anchor.into(), value, tolerance: expected, pass: value == expected }
    }

    /// A boolean property; `value` is 1 for true.
    pub fn holds(name: &str, anchor: &str, ok: bool) -> Self {
        CheckRecord { name: name.into(), anchor: anchor.into(), value: if ok { 1.0 } else { 0.0 }, tolerance: 1.0, pass: ok }
    }
}

/// A complete experiment report: config echo, check records and free-form
/// experiment data (tables, spectra).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub records: Vec<CheckRecord>,
    pub data: Value,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.records.iter().filter(|r| !r.pass).collect()
    }
}

/// Pretty JSON with every float written as `{:.16e}` (17 significant digits)
/// and non-finite floats as `null`.
struct SciFormatter(PrettyFormatter<'static>);

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialize anything with the report float format.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Numerical(e.to_string()))
}

/// `[]` for an empty set, otherwise the records as a JSON array.
pub fn records_json(records: &[CheckRecord]) -> Result<String> {
    to_json(records)
}

fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

/// Leaves of a JSON value as `(dotted path, scalar)` pairs in document order.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        Value::Number(n) if n.is_f64() => out.push((prefix.into(), n.as_f64().map(fmt_f64).unwrap_or_default())),
        Value::Number(n) => out.push((prefix.into(), n.to_string())),
        Value::Bool(b) => out.push((prefix.into(), b.to_string())),
        Value::String(s) => out.push((prefix.into(), s.clone())),
        Value::Null => out.push((prefix.into(), String::new())),
    }
}

/// One row per scalar: check records first, then every leaf of `data`.
pub fn to_csv(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Numerical(format!("csv: {e}"));
    w.write_record(["kind", "name", "anchor", "value", "tolerance", "pass"]).map_err(io)?;
    for r in &report.records {
        w.write_record(["check", &r.name, &r.anchor, &fmt_f64(r.value), &fmt_f64(r.tolerance), &r.pass.to_string()])
            .map_err(io)?;
    }
    let mut leaves = Vec::new();
    flatten("", &report.data, &mut leaves);
    for (path, v) in leaves {
        w.write_record(["data", &path, "", &v, "", ""]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
}

/// Write `report.json` / `report.csv` into `dir`; returns the paths written.
pub fn emit_report(report: &Report, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in formats {
        let (name, body) = match f {
            Format::Json => ("report.json", to_json(report)?),
            Format::Csv => ("report.csv", to_csv(report)?),
        };
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
