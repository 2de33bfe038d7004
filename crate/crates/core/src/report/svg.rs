use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io::write_atomic;
use crate::protocol::AuditReport;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 620.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 440.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub color: String,
    /// `(prefix size, F1)` pairs.
    pub points: Vec<(f64, f64)>,
    /// Optional `(lower, upper)` envelope at each point's x.
    pub band: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Embedded verbatim (escaped) in the SVG `<metadata>` element.
    pub metadata: Option<String>,
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// A round upper bound and tick step for the x axis.
fn x_ticks(max: f64) -> (f64, f64) {
    if max <= 0.0 {
        return (1.0, 1.0);
    }
    let raw = max / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    ((max / step).ceil() * step, step)
}

/// Renders the spec as a standalone SVG document. F1 values outside
/// `[0, 1]` are clamped to the plot area.
pub fn render_svg(spec: &PlotSpec) -> String {
    let max_x = spec
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .fold(0.0, f64::max);
    let (x_max, x_step) = x_ticks(max_x);
    let sx = |x: f64| LEFT + (x / x_max).clamp(0.0, 1.0) * (RIGHT - LEFT);
    let sy = |y: f64| BOTTOM - y.clamp(0.0, 1.0) * (BOTTOM - TOP);

    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    if let Some(meta) = &spec.metadata {
        let _ = writeln!(o, "<metadata>{}</metadata>", escape(meta));
    }
    let _ = writeln!(o, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        o,
        r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        escape(&spec.title)
    );

    // grid and tick labels
    for i in 0..=5 {
        let v = i as f64 * 0.2;
        let y = sy(v);
        let _ = writeln!(
            o,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{RIGHT:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##
        );
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let n_x = (x_max / x_step).round() as usize;
    for i in 0..=n_x {
        let v = i as f64 * x_step;
        let x = sx(v);
        let _ = writeln!(
            o,
            r##"<line x1="{x:.2}" y1="{BOTTOM:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000"/>"##,
            BOTTOM + 5.0
        );
        let _ = writeln!(
            o,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{v}</text>"#,
            BOTTOM + 20.0
        );
    }
    let _ = writeln!(
        o,
        r##"<line x1="{LEFT:.2}" y1="{BOTTOM:.2}" x2="{RIGHT:.2}" y2="{BOTTOM:.2}" stroke="#000"/>"##
    );
    let _ = writeln!(
        o,
        r##"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{BOTTOM:.2}" stroke="#000"/>"##
    );
    let _ = writeln!(
        o,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 45.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        o,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        escape(&spec.y_label)
    );

    for s in &spec.series {
        let Some(band) = &s.band else { continue };
        let upper = s.points.iter().zip(band).map(|(p, b)| (sx(p.0), sy(b.1)));
        let lower = s.points.iter().zip(band).rev().map(|(p, b)| (sx(p.0), sy(b.0)));
        let pts: Vec<String> = upper
            .chain(lower)
            .map(|(x, y)| format!("{x:.2},{y:.2}"))
            .collect();
        let _ = writeln!(
            o,
            r#"<polygon points="{}" fill="{}" fill-opacity="0.15" stroke="none"/>"#,
            pts.join(" "),
            escape(&s.color)
        );
    }
    for s in &spec.series {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            o,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            pts.join(" "),
            escape(&s.color)
        );
    }

    for (i, s) in spec.series.iter().enumerate() {
        let y = TOP + 10.0 + 22.0 * i as f64;
        let x = RIGHT + 20.0;
        let _ = writeln!(
            o,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="3"/>"#,
            x + 24.0,
            escape(&s.color)
        );
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 30.0,
            y + 4.0,
            escape(&s.name)
        );
    }
    o.push_str("</svg>\n");
    o
}

pub fn write_svg(spec: &PlotSpec, path: &Path) -> std::io::Result<()> {
    write_atomic(path, render_svg(spec).as_bytes())
}

/// One series per arm: the seed-averaged F1 with the min/max seed envelope.
pub fn plot_spec_from_report(report: &AuditReport) -> PlotSpec {
    let mut arms: Vec<&str> = Vec::new();
    for c in &report.curves {
        if !arms.contains(&c.arm.as_str()) {
            arms.push(&c.arm);
        }
    }
    let series = arms
        .iter()
        .enumerate()
        .map(|(i, &arm)| {
            let curves: Vec<_> = report.arm_curves(arm).collect();
            let n = curves.iter().map(|c| c.points.len()).min().unwrap_or(0);
            let mut points = Vec::with_capacity(n);
            let mut band = Vec::with_capacity(n);
            for k in 0..n {
                let f: Vec<f64> = curves.iter().map(|c| c.points[k].eval.f1).collect();
                let mean = f.iter().sum::<f64>() / f.len() as f64;
                points.push((curves[0].points[k].prefix_size as f64, mean));
                band.push((
                    f.iter().copied().fold(f64::INFINITY, f64::min),
                    f.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                ));
            }
            Series {
                name: arm.to_string(),
                color: PALETTE[i % PALETTE.len()].to_string(),
                points,
                band: (curves.len() > 1).then_some(band),
            }
        })
        .collect();
    let metadata = serde_json::json!({
        "tool_version": report.tool_version,
        "schema_version": report.schema_version,
        "run_config": report.run_config,
        "seeds": report.seeds,
    });
    PlotSpec {
        title: format!("{}: learning curves (verdict: {})", report.protocol.as_str(), report.verdict),
        x_label: "training sentences fed".into(),
        y_label: "F1 on the new test set".into(),
        series,
        metadata: Some(metadata.to_string()),
    }
}
