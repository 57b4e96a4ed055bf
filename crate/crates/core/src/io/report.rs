//! Evaluation report: JSON plus an aligned text table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::write_atomic;
use crate::error::Result;
use crate::metrics::{ClassMetrics, EvalReport};

/// Placeholder for undefined ratios.
pub const UNDEFINED: &str = "—";

fn cell(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |v| format!("{v:.decimals$}"))
}

fn row(out: &mut String, label: &str, m: &ClassMetrics) {
    let cells = [m.precision, m.recall, m.accuracy, m.f1].map(|v| cell(v, 2));
    let _ = write!(out, "{label:<16}");
    for c in cells {
        let _ = write!(out, "{c:>11}");
    }
    out.push('\n');
}

/// Human-readable table in the column order Precision, Recall, Accuracy, F1.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16}{:>11}{:>11}{:>11}{:>11}",
        "", "Precision", "Recall", "Accuracy", "F1"
    );
    for r in &report.classes {
        row(&mut out, r.class.name(), &r.metrics);
    }
    for d in &report.dataset {
        row(&mut out, &format!("all (EA>={:.2})", d.tau), &d.metrics);
    }
    let _ = writeln!(
        out,
        "images {}  EA slots {}  mean EA {}  median EA {}",
        report.images,
        report.ea_count,
        cell(report.mean_ea, 3),
        cell(report.median_ea, 3)
    );
    out
}

pub fn report_to_json(report: &EvalReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

pub fn parse_report(text: &str) -> Result<EvalReport> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_report(path: &Path) -> Result<EvalReport> {
    parse_report(&std::fs::read_to_string(path)?)
}

/// Path of the text table written next to a JSON report.
pub fn table_path(json_path: &Path) -> PathBuf {
    json_path.with_extension("txt")
}

/// Writes the JSON report to `path` and the table beside it (`.txt`).
pub fn write_report(report: &EvalReport, path: &Path) -> Result<()> {
    write_atomic(path, report_to_json(report)?.as_bytes())?;
    write_atomic(&table_path(path), render_table(report).as_bytes())
}
