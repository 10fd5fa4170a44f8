//! Report artifacts: full-precision CSV data files and JSON verdict reports
//! with deterministic (sorted) key ordering.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{FracError, Result};
use crate::grid::Field;

/// Format a double with 17 significant digits, enough to round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a generic curve as CSV: one header row, full-precision columns.
pub fn write_curve_csv<W: Write>(
    mut out: W,
    headers: &[&str],
    rows: &[Vec<f64>],
) -> std::io::Result<()> {
    writeln!(out, "{}", headers.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Write a field snapshot as CSV (x[,y],u columns).
pub fn write_field_csv<W: Write>(mut out: W, field: &Field) -> std::io::Result<()> {
    match field.grid.dim {
        1 => {
            writeln!(out, "x,u")?;
            for i in 0..field.grid.len() {
                writeln!(out, "{},{}", fmt_f64(field.grid.coord(i)), fmt_f64(field.values[i]))?;
            }
        }
        _ => {
            writeln!(out, "x,y,u")?;
            for i in 0..field.grid.len() {
                let pt = field.grid.point(i);
                writeln!(
                    out,
                    "{},{},{}",
                    fmt_f64(pt[0]),
                    fmt_f64(pt[1]),
                    fmt_f64(field.values[i])
                )?;
            }
        }
    }
    Ok(())
}

/// One named check inside a report: outcome, threshold used, observed value.
#[derive(Debug, Clone, Serialize)]
pub struct ReportItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// A whole experiment report. Serialized through serde_json, whose default
/// map is ordered, so key order is stable across runs and platforms.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    pub passed: bool,
    /// The exact resolved configuration text, round-trippable.
    pub config: String,
    pub items: Vec<ReportItem>,
    pub elapsed_seconds: f64,
}

impl Report {
    pub fn new(experiment: &str, config: String) -> Self {
        Self {
            experiment: experiment.to_string(),
            passed: true,
            config,
            items: Vec::new(),
            elapsed_seconds: 0.0,
        }
    }

    pub fn push(&mut self, item: ReportItem) {
        self.passed &= item.passed;
        self.items.push(item);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    /// Human-readable summary: one line per item plus a verdict line.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for item in &self.items {
            let mark = if item.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!(
                "[{mark}] {} ({:.2}s): {}\n",
                item.name, item.seconds, item.detail
            ));
        }
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!(
            "{}: {verdict} ({} items, {:.2}s)\n",
            self.experiment,
            self.items.len(),
            self.elapsed_seconds
        ));
        s
    }

    /// Write report.json, summary.txt, and config_used.txt under dir.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)
            .map_err(|e| FracError::ConfigError(format!("cannot create {}: {e}", dir.display())))?;
        let io = |e: std::io::Error| FracError::ConfigError(format!("write failed: {e}"));
        std::fs::write(dir.join("report.json"), self.to_json()).map_err(io)?;
        std::fs::write(dir.join("summary.txt"), self.summary()).map_err(io)?;
        std::fs::write(dir.join("config_used.txt"), &self.config).map_err(io)?;
        Ok(())
    }
}
