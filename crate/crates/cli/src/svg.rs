// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! Minimal SVG line and scatter plots.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_Y: f64 = 40.0;
/// Fraction of the data span added on each side of an axis.
pub const PAD: f64 = 0.05;

pub const COLORS: [&str; 4] = ["#d62728", "#2ca02c", "#1f77b4", "#000000"];

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub dashed: bool,
    pub points: Vec<(f64, f64)>,
}

/// Horizontal reference line.
pub struct Reference {
    pub y: f64,
    pub color: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Option<Range> {
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            min = min.min(v);
            max = max.max(v);
        }
        if min > max {
            return None;
        }
        if min == max {
            let d = if min == 0.0 { 1.0 } else { 0.5 * min.abs() };
            return Some(Range { min: min - d, max: max + d });
        }
        let pad = PAD * (max - min);
        Some(Range { min: min - pad, max: max + pad })
    }

    fn map(&self, v: f64, lo: f64, hi: f64) -> f64 {
        lo + (v - self.min) / (self.max - self.min) * (hi - lo)
    }
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
    pub references: Vec<Reference>,
}

/// Axis ranges actually used by [`LinePlot::render`], in plotted units
/// (`log10 x` when `log_x`).
pub fn line_ranges(plot: &LinePlot) -> Option<(Range, Range)> {
    let xs = plot.series.iter().flat_map(|s| s.points.iter().map(|p| plot_x(plot.log_x, p.0)));
    let ys = plot
        .series
        .iter()
        .flat_map(|s| s.points.iter().filter(|p| plot_x(plot.log_x, p.0).is_finite()).map(|p| p.1))
        .chain(plot.references.iter().map(|r| r.y));
    Some((Range::of(xs)?, Range::of(ys)?))
}

fn plot_x(log_x: bool, x: f64) -> f64 {
    if log_x {
        if x > 0.0 {
            x.log10()
        } else {
            f64::NAN
        }
    } else {
        x
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, xr: Range, yr: Range, x_label: &str, y_label: &str, log_x: bool) {
    let (x0, x1, y0, y1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT, HEIGHT - MARGIN_Y, MARGIN_Y);
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = xr.min + f * (xr.max - xr.min);
        let yv = yr.min + f * (yr.max - yr.min);
        let px = x0 + f * (x1 - x0);
        let py = y0 + f * (y1 - y0);
        let xt = if log_x { format!("1e{xv:.1}") } else { format!("{xv:.3e}") };
        let _ = writeln!(out, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{xt}</text>"#, y0 + 16.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3}</text>"#, x0 - 6.0, py + 4.0);
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 6.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

impl LinePlot {
    pub fn render(&self) -> Option<String> {
        let (xr, yr) = line_ranges(self)?;
        let (x0, x1, y0, y1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT, HEIGHT - MARGIN_Y, MARGIN_Y);
        let mut out = String::new();
        header(&mut out, &self.title);
        let x_label = if self.log_x { format!("log10 {}", self.x_label) } else { self.x_label.clone() };
        axes(&mut out, xr, yr, &x_label, "", self.log_x);
        for r in &self.references {
            let py = yr.map(r.y, y0, y1);
            let _ = writeln!(
                out,
                r#"<line class="reference" x1="{x0}" y1="{py:.2}" x2="{x1}" y2="{py:.2}" stroke="{}" stroke-width="0.6"/>"#,
                r.color
            );
        }
        for (i, s) in self.series.iter().enumerate() {
            let pts: Vec<String> = s
                .points
                .iter()
                .filter_map(|&(x, y)| {
                    let px = plot_x(self.log_x, x);
                    (px.is_finite() && y.is_finite())
                        .then(|| format!("{:.2},{:.2}", xr.map(px, x0, x1), yr.map(y, y0, y1)))
                })
                .collect();
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                out,
                r#"<polyline class="series" fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                s.color,
                pts.join(" ")
            );
            let ly = y1 + 16.0 * i as f64 + 10.0;
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}"{dash}/>"#,
                x1 + 10.0,
                x1 + 30.0,
                s.color
            );
            let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, x1 + 36.0, ly + 4.0, escape(&s.label));
        }
        out.push_str("</svg>\n");
        Some(out)
    }
}

/// Label, colour and points of one scatter class.
pub type Class = (&'static str, &'static str, Vec<(f64, f64)>);

/// Scatter of `(x, y)` points, one colour per class.
pub fn scatter(title: &str, x_label: &str, y_label: &str, classes: &[Class]) -> Option<String> {
    let xr = Range::of(classes.iter().flat_map(|c| c.2.iter().map(|p| p.0)))?;
    let yr = Range::of(classes.iter().flat_map(|c| c.2.iter().map(|p| p.1)))?;
    let (x0, x1, y0, y1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT, HEIGHT - MARGIN_Y, MARGIN_Y);
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, xr, yr, x_label, y_label, false);
    for (i, (label, color, pts)) in classes.iter().enumerate() {
        for &(x, y) in pts {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#,
                xr.map(x, x0, x1),
                yr.map(y, y0, y1)
            );
        }
        let ly = y1 + 16.0 * i as f64 + 10.0;
        let _ = writeln!(out, r#"<circle cx="{}" cy="{ly}" r="4" fill="{color}"/>"#, x1 + 20.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, x1 + 36.0, ly + 4.0, escape(label));
    }
    out.push_str("</svg>\n");
    Some(out)
}
