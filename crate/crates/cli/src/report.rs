//! Report files. Floats are written with 17 significant digits so identical
//! runs give identical bytes and a report can be re-read without loss.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use perturbkit::krein::Coefficient;
use perturbkit::C64;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};

use crate::CliError;

/// Finite floats become JSON numbers; the rest are spelled out.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::String("NaN".into())
    } else if x > 0.0 {
        Value::String("Infinity".into())
    } else {
        Value::String("-Infinity".into())
    }
}

pub fn complex(z: C64) -> Value {
    let mut m = Map::new();
    m.insert("re".into(), num(z.re));
    m.insert("im".into(), num(z.im));
    Value::Object(m)
}

pub fn coefficient(b: Coefficient) -> Value {
    match b {
        Coefficient::Finite(z) => complex(z),
        Coefficient::Infinity => Value::String("Infinity".into()),
    }
}

pub fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn to_bytes(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Both,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write to a sibling temp file, sync, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err(path))
}

/// Pretty printing with every float in `{:.16e}` form.
struct Fixed<'a>(PrettyFormatter<'a>);

impl Formatter for Fixed<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_bytes(report: &Value) -> Vec<u8> {
    let mut bytes = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut bytes, Fixed(PrettyFormatter::new()));
    report.serialize(&mut ser).expect("json values always serialize");
    bytes.push(b'\n');
    bytes
}

/// Write `report.json` and/or `table.csv` into `dir`; returns what was written.
pub fn emit(dir: &Path, report: &Value, table: Option<&Table>, format: Format) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    if format != Format::Csv {
        let p = dir.join("report.json");
        write_atomic(&p, &to_json_bytes(report))?;
        written.push(p);
    }
    if let (Some(t), true) = (table, format != Format::Json) {
        let p = dir.join("table.csv");
        let bytes = t.to_bytes().map_err(|e| CliError::Io {
            path: p.display().to_string(),
            source: std::io::Error::other(e),
        })?;
        write_atomic(&p, &bytes)?;
        written.push(p);
    }
    Ok(written)
}

/// Differences between two result trees; numbers agree to `rel_tol`.
pub fn compare(expected: &Value, actual: &Value, rel_tol: f64) -> Vec<String> {
    let mut out = Vec::new();
    walk(expected, actual, "result", rel_tol, &mut out);
    out
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.as_str() {
            "Infinity" => Some(f64::INFINITY),
            "-Infinity" => Some(f64::NEG_INFINITY),
            "NaN" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

fn walk(e: &Value, a: &Value, path: &str, tol: f64, out: &mut Vec<String>) {
    match (e, a) {
        (Value::Object(me), Value::Object(ma)) => {
            for (k, ve) in me {
                match ma.get(k) {
                    Some(va) => walk(ve, va, &format!("{path}.{k}"), tol, out),
                    None => out.push(format!("{path}.{k}: missing from recomputation")),
                }
            }
            for k in ma.keys().filter(|k| !me.contains_key(*k)) {
                out.push(format!("{path}.{k}: not in report"));
            }
        }
        (Value::Array(ve), Value::Array(va)) => {
            if ve.len() != va.len() {
                out.push(format!("{path}: length {} in report, {} recomputed", ve.len(), va.len()));
                return;
            }
            for (i, (x, y)) in ve.iter().zip(va).enumerate() {
                walk(x, y, &format!("{path}[{i}]"), tol, out);
            }
        }
        _ => match (as_float(e), as_float(a)) {
            (Some(x), Some(y)) => {
                let same = x == y || (x.is_nan() && y.is_nan());
                if !same && !((x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)) {
                    out.push(format!("{path}: {x:e} in report, {y:e} recomputed"));
                }
            }
            _ if e == a => {}
            _ => out.push(format!("{path}: {e} in report, {a} recomputed")),
        },
    }
}
