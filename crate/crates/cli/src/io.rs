//! CSV and JSON files. Every output is written to a temporary file in the
//! target directory and renamed into place.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use omori_hawkes::PriceRow;
use serde::Serialize;

use crate::error::{CliError, Result};

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Data(format!("{}: {:?}", path.display(), other)),
    }
}

/// Column positions for `names`, in order.
fn columns<R: Read>(path: &Path, rdr: &mut csv::Reader<R>, names: &[&str]) -> Result<Vec<usize>> {
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    names
        .iter()
        .map(|name| {
            headers.iter().position(|h| h == *name).ok_or_else(|| {
                CliError::Data(format!(
                    "{}: missing column `{name}` (header: {})",
                    path.display(),
                    headers.iter().collect::<Vec<_>>().join(",")
                ))
            })
        })
        .collect()
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn parse_f64(path: &Path, record: &csv::StringRecord, col: usize, what: &str) -> Result<f64> {
    let raw = record.get(col).unwrap_or("");
    raw.parse().map_err(|_| {
        CliError::Data(format!(
            "{}:{}: invalid {what} `{raw}`",
            path.display(),
            line_of(record)
        ))
    })
}

/// Reads a `date,close` price file. Blank, `NA` and `null` closes become
/// missing values; `NaN` parses and is dropped later as non-finite.
pub fn read_prices(path: &Path) -> Result<Vec<PriceRow>> {
    let mut rdr = open(path)?;
    let cols = columns(path, &mut rdr, &["date", "close"])?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let raw_date = record.get(cols[0]).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| {
            CliError::Data(format!(
                "{}:{}: invalid date `{raw_date}` (expected YYYY-MM-DD)",
                path.display(),
                line_of(&record)
            ))
        })?;
        let raw = record.get(cols[1]).unwrap_or("");
        let close = if raw.is_empty() || ["na", "n/a", "null"].contains(&raw.to_ascii_lowercase().as_str()) {
            None
        } else {
            Some(parse_f64(path, &record, cols[1], "close")?)
        };
        rows.push(PriceRow { date, close });
    }
    Ok(rows)
}

/// Reads a single-column `tau_days` file. A file that is empty or has only
/// the header yields an empty sample.
pub fn read_interevents(path: &Path) -> Result<Vec<f64>> {
    if std::fs::metadata(path).map_err(|e| CliError::io(path, e))?.len() == 0 {
        return Ok(Vec::new());
    }
    let mut rdr = open(path)?;
    let col = columns(path, &mut rdr, &["tau_days"])?[0];
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let tau = parse_f64(path, &record, col, "tau_days")?;
        if !(tau.is_finite() && tau > 0.0) {
            return Err(CliError::Data(format!(
                "{}:{}: interevent times must be finite and > 0, got {tau}",
                path.display(),
                line_of(&record)
            )));
        }
        out.push(tau);
    }
    Ok(out)
}

/// Reads `mean_tau,lambda` pairs.
pub fn read_points(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = open(path)?;
    let cols = columns(path, &mut rdr, &["mean_tau", "lambda"])?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        out.push((
            parse_f64(path, &record, cols[0], "mean_tau")?,
            parse_f64(path, &record, cols[1], "lambda")?,
        ));
    }
    Ok(out)
}

/// One row of a curves file; `empirical` is empty for model-only curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub tau: f64,
    pub empirical: Option<f64>,
    pub model: f64,
}

pub const CURVES_HEADER: [&str; 3] = ["tau", "empirical_density", "model_density"];

pub fn read_curves(path: &Path) -> Result<Vec<CurveRow>> {
    let mut rdr = open(path)?;
    let cols = columns(path, &mut rdr, &CURVES_HEADER)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let empirical = match record.get(cols[1]) {
            Some("") | None => None,
            Some(_) => Some(parse_f64(path, &record, cols[1], "empirical_density")?),
        };
        out.push(CurveRow {
            tau: parse_f64(path, &record, cols[0], "tau")?,
            empirical,
            model: parse_f64(path, &record, cols[2], "model_density")?,
        });
    }
    Ok(out)
}

/// Writes `bytes` to `path` via a temporary file in the same directory, so
/// readers never observe a partial file. Missing parent directories are created.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Formats a float with the shortest representation that round-trips.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Data(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    write_atomic(path, &bytes)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
