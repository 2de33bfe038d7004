//! CSV and SVG output for audit reports.

mod svg;

use std::fmt::Write as _;
use std::path::Path;

use crate::io::write_atomic;
use crate::protocol::AuditReport;

pub use svg::{plot_spec_from_report, render_svg, write_svg, PlotSpec, Series, PALETTE};

pub const CSV_HEADER: &str = "protocol,arm,seed,prefix_size,precision,recall,f1";

/// One row per (curve, checkpoint) with six-decimal scores.
pub fn csv_string(report: &AuditReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for curve in &report.curves {
        for p in &curve.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{:.6},{:.6}",
                report.protocol.as_str(),
                curve.arm,
                curve.seed,
                p.prefix_size,
                p.eval.precision,
                p.eval.recall,
                p.eval.f1
            );
        }
    }
    out
}

pub fn write_csv(report: &AuditReport, path: &Path) -> std::io::Result<()> {
    write_atomic(path, csv_string(report).as_bytes())
}
