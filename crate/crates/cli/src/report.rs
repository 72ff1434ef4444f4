//! Check records, result tables and their emission as CSV or JSON.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{io_err, CliError, Result};

/// Outcome of one check.
///
/// `passed` is the raw outcome against the tolerance. For negative controls
/// (`control = true`) the expected raw outcome is a failure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub grid: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_max: Option<f64>,
    /// Deviation tolerance, or the allowed max/min spread for ratio checks.
    pub tolerance: f64,
    pub passed: bool,
    pub control: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl VerificationReport {
    /// Identity check: passes iff `max_deviation <= tolerance`.
    pub fn deviation(
        check: impl Into<String>,
        grid: impl Into<String>,
        max_deviation: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            check: check.into(),
            grid: grid.into(),
            max_deviation: Some(max_deviation),
            ratio_min: None,
            ratio_max: None,
            tolerance,
            passed: max_deviation <= tolerance,
            control: false,
            note: None,
            runtime: Duration::ZERO,
        }
    }

    /// Bounded-ratio check: passes iff all ratios are finite and positive and
    /// `max / min <= spread`.
    pub fn ratio(
        check: impl Into<String>,
        grid: impl Into<String>,
        ratios: &[f64],
        spread: f64,
    ) -> Self {
        let (lo, hi) = min_max(ratios);
        let ok = !ratios.is_empty() && lo > 0.0 && hi.is_finite() && hi / lo <= spread;
        Self {
            check: check.into(),
            grid: grid.into(),
            max_deviation: None,
            ratio_min: Some(lo),
            ratio_max: Some(hi),
            tolerance: spread,
            passed: ok,
            control: false,
            note: None,
            runtime: Duration::ZERO,
        }
    }

    pub fn as_control(mut self) -> Self {
        self.control = true;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_runtime(mut self, runtime: Duration) -> Self {
        self.runtime = runtime;
        self
    }

    /// `max / min` of the recorded ratios.
    pub fn spread(&self) -> Option<f64> {
        match (self.ratio_min, self.ratio_max) {
            (Some(lo), Some(hi)) => Some(hi / lo),
            _ => None,
        }
    }

    /// Whether the check behaved as intended: pass for ordinary checks,
    /// fail for negative controls.
    pub fn as_expected(&self) -> bool {
        self.passed != self.control
    }
}

/// Minimum and maximum of a slice; `(inf, -inf)` when empty.
pub fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Summary check for a suite: passes iff it contains at least one negative
/// control and every control failed its own check.
pub fn control_guard(suite: &str, reports: &[VerificationReport]) -> VerificationReport {
    let controls: Vec<&VerificationReport> = reports.iter().filter(|r| r.control).collect();
    let detected = controls.iter().filter(|r| !r.passed).count();
    let mut r = VerificationReport::deviation(
        format!("{suite}/negative_controls_detected"),
        format!("{} controls", controls.len()),
        (controls.len() - detected) as f64,
        0.0,
    );
    r.passed = !controls.is_empty() && detected == controls.len();
    r
}

/// 0 iff every non-control check passed.
pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    if reports.iter().filter(|r| !r.control).all(|r| r.passed) {
        0
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    /// A ratio whose denominator vanished; excluded from spread statistics.
    ZeroDenominator,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::ZeroDenominator => "inf".to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(v.to_string()),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::ZeroDenominator => json!("inf"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::ZeroDenominator, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, headers: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Numeric column values, skipping sentinels and text.
    pub fn column(&self, header: &str) -> Vec<f64> {
        let Some(j) = self.headers.iter().position(|h| *h == header) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| match r[j] {
                Cell::Num(v) => Some(v),
                Cell::Int(v) => Some(v as f64),
                _ => None,
            })
            .collect()
    }

    fn file_stem(&self) -> String {
        self.name
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                    c
                } else {
                    '_'
                }
            })
            .collect()
    }

    fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Usage(format!("csv encoding failed: {e}"));
        w.write_record(&self.headers).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(fail)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Usage(format!("csv encoding failed: {e}")))
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "headers": self.headers,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Usage(format!(
                "unknown format {s:?} (csv or json)"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Writes every table and `summary.json` into `out`; returns the written paths.
///
/// The summary carries no timings so that identical inputs give identical files.
pub fn emit(
    out: &Path,
    tables: &[Table],
    reports: &[VerificationReport],
    format: Format,
    config: Value,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let mut written = Vec::new();
    let mut names = Vec::new();
    for t in tables {
        let path = out.join(format!("{}.{format}", t.file_stem()));
        let bytes = match format {
            Format::Csv => t.to_csv()?,
            Format::Json => {
                let mut b = serde_json::to_vec_pretty(&t.to_json())?;
                b.push(b'\n');
                b
            }
        };
        std::fs::write(&path, bytes).map_err(io_err(&path))?;
        names.push(
            path.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
        );
        written.push(path);
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.control && !r.passed)
        .map(|r| r.check.as_str())
        .collect();
    let summary = json!({
        "status": if failed.is_empty() { "pass" } else { "fail" },
        "exit_code": exit_code(reports),
        "checks_total": reports.iter().filter(|r| !r.control).count(),
        "checks_failed": failed,
        "controls_total": reports.iter().filter(|r| r.control).count(),
        "controls_detected": reports.iter().filter(|r| r.control && !r.passed).count(),
        "checks": reports,
        "tables": names,
        "config": config,
    });
    let path = out.join("summary.json");
    let mut bytes = serde_json::to_vec_pretty(&summary)?;
    bytes.push(b'\n');
    std::fs::write(&path, bytes).map_err(io_err(&path))?;
    written.push(path);
    Ok(written)
}
