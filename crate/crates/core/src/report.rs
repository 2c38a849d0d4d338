//! Report rows in CSV and JSON form.
//!
//! Both forms use the same field names. Non-finite PSNR is written as the
//! string `inf`; values that do not apply to a row are left empty (CSV) or
//! `null` (JSON).

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "stage,method,iteration,mse,psnr_db,cracks_total,regions,boundary_f1,wall_time_ms";

pub const FIELDS: [&str; 9] = [
    "stage",
    "method",
    "iteration",
    "mse",
    "psnr_db",
    "cracks_total",
    "regions",
    "boundary_f1",
    "wall_time_ms",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub stage: String,
    pub method: String,
    pub iteration: usize,
    pub mse: Option<f64>,
    pub psnr_db: Option<f64>,
    pub cracks_total: usize,
    pub regions: Option<usize>,
    pub boundary_f1: Option<f64>,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown report format {other:?} (expected csv or json)"
            ))),
        }
    }
}

pub fn format_float(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ReportRow {
    pub fn to_csv_line(&self) -> String {
        [
            csv_field(&self.stage),
            csv_field(&self.method),
            self.iteration.to_string(),
            opt(self.mse, format_float),
            opt(self.psnr_db, format_float),
            self.cracks_total.to_string(),
            opt(self.regions, |r| r.to_string()),
            opt(self.boundary_f1, format_float),
            self.wall_time_ms.to_string(),
        ]
        .join(",")
    }

    pub fn to_json(&self) -> Value {
        let num = |v: Option<f64>| match v {
            None => Value::Null,
            Some(x) if x.is_finite() => Value::from(x),
            Some(x) => Value::from(format_float(x)),
        };
        let mut m = Map::new();
        m.insert("stage".into(), Value::from(self.stage.clone()));
        m.insert("method".into(), Value::from(self.method.clone()));
        m.insert("iteration".into(), Value::from(self.iteration));
        m.insert("mse".into(), num(self.mse));
        m.insert("psnr_db".into(), num(self.psnr_db));
        m.insert("cracks_total".into(), Value::from(self.cracks_total));
        m.insert(
            "regions".into(),
            self.regions.map_or(Value::Null, Value::from),
        );
        m.insert("boundary_f1".into(), num(self.boundary_f1));
        m.insert("wall_time_ms".into(), Value::from(self.wall_time_ms));
        Value::Object(m)
    }
}

pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn rows_to_json(rows: &[ReportRow]) -> String {
    let arr = Value::Array(rows.iter().map(ReportRow::to_json).collect());
    serde_json::to_string_pretty(&arr).expect("report rows serialize") + "\n"
}

/// Writes `rows` to `path`, appending when the file already holds a report
/// with the same schema. A file with a different schema is an error and is
/// left untouched.
pub fn write_report(path: &Path, rows: &[ReportRow], format: ReportFormat) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let existing = match fs::read_to_string(path) {
        Ok(s) => Some(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(io(e)),
    };
    let schema_err = |reason: &str| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason: format!("existing report {reason}"),
    };
    let body = match (format, existing) {
        (ReportFormat::Csv, None) => rows_to_csv(rows),
        (ReportFormat::Csv, Some(old)) => {
            if old.lines().next() != Some(CSV_HEADER) {
                return Err(schema_err("has a different CSV header"));
            }
            let mut out = old;
            if !out.ends_with('\n') {
                out.push('\n');
            }
            for r in rows {
                out.push_str(&r.to_csv_line());
                out.push('\n');
            }
            out
        }
        (ReportFormat::Json, None) => rows_to_json(rows),
        (ReportFormat::Json, Some(old)) => {
            let mut arr = match serde_json::from_str::<Value>(&old) {
                Ok(Value::Array(a)) => a,
                _ => return Err(schema_err("is not a JSON array")),
            };
            let same_fields = arr.iter().all(|v| {
                v.as_object().is_some_and(|o| {
                    o.len() == FIELDS.len() && FIELDS.iter().all(|f| o.contains_key(*f))
                })
            });
            if !same_fields {
                return Err(schema_err("has different JSON fields"));
            }
            arr.extend(rows.iter().map(ReportRow::to_json));
            serde_json::to_string_pretty(&Value::Array(arr)).expect("report rows serialize") + "\n"
        }
    };
    fs::write(path, body).map_err(io)
}
