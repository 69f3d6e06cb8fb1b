//! The [`CheckReport`] record and its JSON, CSV and SVG renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result};

/// Outcome of one named verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub citation: String,
    pub tolerance: f64,
    pub max_error: f64,
    pub pass: bool,
    pub metadata: BTreeMap<String, Value>,
}

/// Non-finite errors are stored as `f64::MAX` so they always fail and stay
/// representable in JSON.
fn finite_or_max(x: f64) -> f64 {
    if x.is_finite() {
        x.abs()
    } else {
        f64::MAX
    }
}

impl CheckReport {
    /// `pass` is derived as `max_error ≤ tolerance`.
    pub fn new(check_id: &str, citation: &str, tolerance: f64, max_error: f64) -> Self {
        let max_error = finite_or_max(max_error);
        Self {
            check_id: check_id.to_string(),
            citation: citation.to_string(),
            tolerance,
            max_error,
            pass: max_error <= tolerance,
            metadata: BTreeMap::new(),
        }
    }

    /// Report for a boolean condition: error 0 when it holds, 1 otherwise.
    pub fn condition(check_id: &str, citation: &str, holds: bool) -> Self {
        Self::new(check_id, citation, 0.5, if holds { 0.0 } else { 1.0 })
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn with_json<T: Serialize>(mut self, key: &str, value: &T) -> Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metadata.insert(key.to_string(), v);
        self
    }

    /// Attach an x/y series rendered as a line plot by the SVG emitter.
    pub fn with_series(self, title: &str, x: &[f64], y: &[f64], log_log: bool) -> Self {
        let plot = serde_json::json!({ "title": title, "x": x, "y": y, "log_log": log_log });
        self.with("plot_series", plot)
    }

    /// Attach a matrix rendered as a heatmap by the SVG emitter.
    pub fn with_heatmap(self, title: &str, rows: &[Vec<f64>]) -> Self {
        let plot = serde_json::json!({ "title": title, "rows": rows });
        self.with("plot_heatmap", plot)
    }

    /// Combine several sub-checks: worst ratio decides, sub-results kept.
    pub fn combine(check_id: &str, citation: &str, parts: Vec<CheckReport>) -> Self {
        let pass = parts.iter().all(|p| p.pass);
        let worst = parts
            .iter()
            .map(|p| {
                if p.tolerance > 0.0 {
                    p.max_error / p.tolerance
                } else {
                    p.max_error
                }
            })
            .fold(0.0f64, f64::max);
        let mut r = Self::new(check_id, citation, 1.0, worst);
        r.pass = pass && r.max_error <= 1.0;
        r.with_json("parts", &parts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(Error::Usage(format!(
                "unknown format '{other}'; use json, csv or svg"
            ))),
        }
    }
}

pub const CSV_HEADER: [&str; 6] = [
    "check_id",
    "citation",
    "tolerance",
    "max_error",
    "pass",
    "metadata",
];

pub fn to_json(reports: &[CheckReport]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(reports)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<Vec<CheckReport>> {
    Ok(serde_json::from_str(text)?)
}

pub fn to_csv(reports: &[CheckReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in reports {
        w.write_record([
            r.check_id.clone(),
            r.citation.clone(),
            format!("{:e}", r.tolerance),
            format!("{:e}", r.max_error),
            r.pass.to_string(),
            serde_json::to_string(&r.metadata)?,
        ])
        .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
}

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 300.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .map(|a| a.iter().filter_map(Value::as_f64).collect())
        .unwrap_or_default()
}

fn series_panel(out: &mut String, top: f64, plot: &Value) {
    let title = plot["title"].as_str().unwrap_or("");
    let log = plot["log_log"].as_bool().unwrap_or(false);
    let tr = |v: f64| if log { v.abs().max(1e-300).ln() } else { v };
    let xs: Vec<f64> = floats(&plot["x"]).into_iter().map(tr).collect();
    let ys: Vec<f64> = floats(&plot["y"]).into_iter().map(tr).collect();
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.1}" font-size="14">{}</text>"#,
        top + 20.0,
        escape(title)
    );
    if xs.is_empty() || xs.len() != ys.len() {
        return;
    }
    let span = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, hi + 1.0)
        }
    };
    let (x0, x1) = span(&xs);
    let (y0, y1) = span(&ys);
    let (left, right, ptop, bottom) = (60.0, PANEL_W - 20.0, top + 35.0, top + PANEL_H - 30.0);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (right - left);
    let py = |y: f64| bottom - (y - y0) / (y1 - y0) * (bottom - ptop);
    let _ = writeln!(
        out,
        r##"<rect x="{left}" y="{ptop:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#999"/>"##,
        right - left,
        bottom - ptop
    );
    let pts: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
        .collect();
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        pts.join(" ")
    );
    for (x, y) in xs.iter().zip(&ys) {
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f77b4"/>"##,
            px(*x),
            py(*y)
        );
    }
    let axis = if log { " (log-log)" } else { "" };
    let _ = writeln!(
        out,
        r#"<text x="{left}" y="{:.1}" font-size="11">x: [{x0:.3e}, {x1:.3e}] y: [{y0:.3e}, {y1:.3e}]{axis}</text>"#,
        bottom + 20.0
    );
}

fn heatmap_panel(out: &mut String, top: f64, plot: &Value) {
    let title = plot["title"].as_str().unwrap_or("");
    let rows: Vec<Vec<f64>> = plot["rows"]
        .as_array()
        .map(|a| a.iter().map(floats).collect())
        .unwrap_or_default();
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.1}" font-size="14">{}</text>"#,
        top + 20.0,
        escape(title)
    );
    let n = rows.len();
    if n == 0 {
        return;
    }
    let m = rows.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let hi = rows
        .iter()
        .flatten()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let cell = ((PANEL_H - 50.0) / n as f64).min((PANEL_W - 80.0) / m as f64);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let t = (v.abs() / hi).clamp(0.0, 1.0);
            let shade = (255.0 * (1.0 - t)).round() as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="{cell:.1}" height="{cell:.1}" fill="rgb({shade},{shade},255)"><title>{v:.6e}</title></rect>"#,
                60.0 + j as f64 * cell,
                top + 35.0 + i as f64 * cell
            );
        }
    }
}

pub fn to_svg(reports: &[CheckReport]) -> String {
    let panels: Vec<(&CheckReport, &str, &Value)> = reports
        .iter()
        .flat_map(|r| {
            ["plot_series", "plot_heatmap"]
                .into_iter()
                .filter_map(move |k| r.metadata.get(k).map(|v| (r, k, v)))
        })
        .collect();
    let summary_h = 40.0 + 18.0 * reports.len() as f64;
    let height = summary_h + PANEL_H * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height:.0}" font-family="monospace">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="24" font-size="16">quantlab checks</text>"#
    );
    for (i, r) in reports.iter().enumerate() {
        let colour = if r.pass { "#2ca02c" } else { "#d62728" };
        let y = 44.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="20" y="{:.1}" width="10" height="10" fill="{colour}"/>"#,
            y - 9.0
        );
        let _ = writeln!(
            out,
            r#"<text x="36" y="{y:.1}" font-size="12">{} err={:.3e} tol={:.1e}</text>"#,
            escape(&r.check_id),
            r.max_error,
            r.tolerance
        );
    }
    for (k, (r, kind, plot)) in panels.iter().enumerate() {
        let top = summary_h + PANEL_H * k as f64;
        let mut p = (*plot).clone();
        if p["title"].as_str().map(str::is_empty).unwrap_or(true) {
            p["title"] = Value::String(r.check_id.clone());
        }
        if *kind == "plot_series" {
            series_panel(&mut out, top, &p);
        } else {
            heatmap_panel(&mut out, top, &p);
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn render(reports: &[CheckReport], format: Format) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::Usage("no reports to emit".into()));
    }
    match format {
        Format::Json => to_json(reports),
        Format::Csv => to_csv(reports),
        Format::Svg => Ok(to_svg(reports)),
    }
}

pub fn emit(reports: &[CheckReport], format: Format, path: &Path) -> Result<()> {
    let text = render(reports, format)?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<CheckReport> {
        vec![
            CheckReport::new("a", "x = y", 1e-6, 2e-7).with("level", 8),
            CheckReport::new("b, quoted \"id\"", "z", 1e-6, f64::NAN)
                .with_series("E(m)", &[1.0, 2.0], &[0.5, 0.25], true)
                .with_heatmap("gram", &[vec![1.0, 0.0], vec![0.0, 1.0]]),
        ]
    }

    #[test]
    fn pass_flag_follows_tolerance() {
        let r = sample();
        assert!(r[0].pass);
        assert!(!r[1].pass);
        assert_eq!(r[1].max_error, f64::MAX);
        assert!(CheckReport::new("t", "c", 1.0, 1.0).pass);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(from_json(&to_json(&r).unwrap()).unwrap(), r);
    }

    #[test]
    fn csv_has_six_columns() {
        let text = to_csv(&sample()).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(rd.headers().unwrap().len(), 6);
        let rows: Vec<_> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.len() == 6));
        assert_eq!(&rows[1][0], "b, quoted \"id\"");
    }

    #[test]
    fn svg_contains_panels() {
        let s = to_svg(&sample());
        assert!(s.starts_with("<svg"));
        assert!(s.contains("polyline"));
        assert!(s.contains("rgb("));
    }

    #[test]
    fn empty_is_usage_error() {
        assert!(matches!(render(&[], Format::Json), Err(Error::Usage(_))));
    }

    #[test]
    fn combined_report() {
        let c = CheckReport::combine("all", "c", sample());
        assert!(!c.pass);
        let ok = CheckReport::combine("ok", "c", vec![sample().remove(0)]);
        assert!(ok.pass);
        assert!((ok.max_error - 0.2).abs() < 1e-12);
    }
}
