//! CSV and JSON serialization of grids and validation reports.
//!
//! Floats are written as `{:.16e}` (17 significant digits, round-trip exact).
//! JSON objects have sorted keys and numbers keep their textual form, so
//! parsing and re-serializing an export reproduces it byte for byte.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use coulomb_tmatrix::ValidationStatus;
use serde_json::{json, Map, Number, Value};
use thiserror::Error;

use crate::grid::GridOutput;
use crate::validation::ValidationReport;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 10] = [
    "k",
    "k_prime",
    "cos_theta",
    "omega",
    "eta",
    "gamma",
    "representation",
    "value",
    "abs_err_est",
    "flags",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            _ => Err(format!("unknown format '{s}' (expected csv, json or text)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("I/O failure: {0}")]
    Io(#[from] io::Error),
    #[error("CSV failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0} export is not available for this content")]
    Unsupported(&'static str),
}

pub enum Exportable<'a> {
    Grid(&'a GridOutput),
    Report(&'a ValidationReport),
}

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&float(x)).expect("formatted floats are valid JSON numbers"))
    } else {
        Value::Null
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

pub fn write_csv<W: Write>(grid: &GridOutput, out: W) -> Result<(), ExportError> {
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Necessary)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &grid.rows {
        w.write_record([
            float(r.k),
            float(r.k_prime),
            float(r.cos_theta),
            opt_float(r.omega),
            opt_float(r.eta),
            float(r.gamma),
            r.representation.name().to_string(),
            opt_float(r.value),
            opt_float(r.abs_err_est),
            r.flags.join("|"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn grid_json(grid: &GridOutput) -> Value {
    let rows: Vec<Value> = grid
        .rows
        .iter()
        .map(|r| {
            json!({
                "k": num(r.k),
                "k_prime": num(r.k_prime),
                "cos_theta": num(r.cos_theta),
                "omega": opt_num(r.omega),
                "eta": opt_num(r.eta),
                "gamma": num(r.gamma),
                "representation": r.representation.name(),
                "value": opt_num(r.value),
                "abs_err_est": opt_num(r.abs_err_est),
                "flags": r.flags,
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "grid",
        "gamma": num(grid.gamma),
        "kappa": num(grid.kappa),
        "energy": num(grid.energy),
        "rows": rows,
    })
}

fn status_json(s: &ValidationStatus) -> Value {
    match *s {
        ValidationStatus::Confirmed { max_rel_dev } => json!({
            "status": "CONFIRMED",
            "max_rel_dev": num(max_rel_dev),
        }),
        ValidationStatus::Discrepant {
            max_rel_dev,
            omega_at_max,
        } => json!({
            "status": "DISCREPANT",
            "max_rel_dev": num(max_rel_dev),
            "omega_at_max": num(omega_at_max),
        }),
    }
}

pub fn report_json(report: &ValidationReport) -> Value {
    let m = &report.metadata;
    let forms: Vec<Value> = report
        .forms
        .iter()
        .map(|f| {
            json!({
                "form": f.form.to_string(),
                "printed": status_json(&f.printed),
                "corrected": f.corrected.as_ref().map_or(Value::Null, status_json),
                "note": f.note,
                "passes": f.passes(),
            })
        })
        .collect();
    let identities: Vec<Value> = report
        .identities
        .iter()
        .map(|i| {
            let mut v = status_json(&i.status);
            let obj = v.as_object_mut().expect("status is an object");
            obj.insert("name".into(), i.name.into());
            obj.insert("threshold".into(), num(i.threshold));
            obj.insert("detail".into(), i.detail.clone().into());
            v
        })
        .collect();
    let coverage: Map<String, Value> = report
        .coverage
        .iter()
        .map(|(k, &v)| (k.to_string(), Value::Bool(v)))
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "validation_report",
        "metadata": {
            "version": m.version,
            "tolerance": num(m.tolerance),
            "grid": {
                "points": m.grid_points,
                "lo": num(m.grid_lo),
                "hi": num(m.grid_hi),
            },
            "series_target_rel_tol": num(m.series_target_rel_tol),
            "series_max_terms": m.series_max_terms,
            "quadrature_rel_tol": num(m.quadrature_rel_tol),
        },
        "forms": forms,
        "identities": identities,
        "coverage": coverage,
        "internal_failures": report.internal_failures,
        "outcome": match report.outcome() {
            crate::validation::Outcome::AllConfirmed => "all_confirmed",
            crate::validation::Outcome::Discrepancies => "discrepancies",
            crate::validation::Outcome::InternalFailure => "internal_failure",
        },
    })
}

/// Canonical JSON text: pretty-printed, sorted keys, trailing newline.
pub fn to_canonical_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn export<W: Write>(format: Format, content: &Exportable<'_>, mut out: W) -> Result<(), ExportError> {
    match (format, content) {
        (Format::Csv, Exportable::Grid(g)) => write_csv(g, out),
        (Format::Csv, Exportable::Report(_)) => Err(ExportError::Unsupported("csv")),
        (Format::Json, Exportable::Grid(g)) => Ok(out.write_all(to_canonical_json(&grid_json(g)).as_bytes())?),
        (Format::Json, Exportable::Report(r)) => {
            Ok(out.write_all(to_canonical_json(&report_json(r)).as_bytes())?)
        }
        (Format::Text, Exportable::Report(r)) => Ok(write!(out, "{r}")?),
        (Format::Text, Exportable::Grid(_)) => Err(ExportError::Unsupported("text")),
    }
}

pub fn export_to_path(format: Format, content: &Exportable<'_>, path: &Path) -> Result<(), ExportError> {
    let mut w = BufWriter::new(File::create(path)?);
    export(format, content, &mut w)?;
    w.flush()?;
    Ok(())
}
