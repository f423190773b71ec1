use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};

use super::BoundReportRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::invalid(format!("unknown report format `{other}`"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

const HEADER: [&str; 8] = [
    "scenario",
    "n",
    "replications",
    "empirical_mse",
    "std_err",
    "bound",
    "pass",
    "extras_json",
];

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn non_empty(rows: &[BoundReportRow]) -> Result<()> {
    if rows.is_empty() {
        Err(Error::invalid("report has no rows"))
    } else {
        Ok(())
    }
}

/// CSV with a `# generated_at_unix=…` comment line before the header.
pub fn render_csv(rows: &[BoundReportRow]) -> Result<String> {
    non_empty(rows)?;
    let mut out = format!("# generated_at_unix={}\n", unix_now());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.n.to_string(),
            r.replications.to_string(),
            r.empirical_mse.to_string(),
            r.std_err.to_string(),
            r.bound.to_string(),
            r.pass.to_string(),
            serde_json::to_string(&r.extras)?,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?);
    Ok(out)
}

#[derive(Serialize)]
struct JsonReport<'a> {
    generated_at_unix: u64,
    rows: &'a [BoundReportRow],
}

pub fn render_json(rows: &[BoundReportRow]) -> Result<String> {
    non_empty(rows)?;
    Ok(serde_json::to_string_pretty(&JsonReport {
        generated_at_unix: unix_now(),
        rows,
    })?)
}

/// Inverse of [`render_csv`].
pub fn parse_csv_report(text: &str) -> Result<Vec<BoundReportRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(Error::Parse(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let parse_err = |field: &str, line: usize| Error::Parse(format!("bad {field} on record {line}"));
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let get = |j: usize| rec.get(j).unwrap_or("");
        let extras: Map<String, Value> = serde_json::from_str(get(7))?;
        rows.push(BoundReportRow {
            scenario: get(0).to_string(),
            n: get(1).parse().map_err(|_| parse_err("n", i + 1))?,
            replications: get(2).parse().map_err(|_| parse_err("replications", i + 1))?,
            empirical_mse: get(3).parse().map_err(|_| parse_err("empirical_mse", i + 1))?,
            std_err: get(4).parse().map_err(|_| parse_err("std_err", i + 1))?,
            bound: get(5).parse().map_err(|_| parse_err("bound", i + 1))?,
            pass: get(6).parse().map_err(|_| parse_err("pass", i + 1))?,
            extras,
        });
    }
    non_empty(&rows)?;
    Ok(rows)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn emit_report(rows: &[BoundReportRow], path: &Path, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => render_csv(rows)?,
        ReportFormat::Json => render_json(rows)?,
    };
    write(path, &text)
}

/// Points for an MSE-versus-`1/n` plot: one line per row with the bound
/// beside the empirical MSE.
pub fn emit_plot_data(rows: &[BoundReportRow], path: &Path) -> Result<()> {
    non_empty(rows)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "inv_n", "empirical_mse", "std_err", "bound"])?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            (1.0 / r.n as f64).to_string(),
            r.empirical_mse.to_string(),
            r.std_err.to_string(),
            r.bound.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    write(path, &String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?)
}
