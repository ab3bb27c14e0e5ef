// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Minimal SVG charts: axes, polylines, bands, steps and box glyphs.
//! Output is a pure function of the input, with fixed float formatting.

use std::fmt::Write;

use crate::metrics::BoxStats;

const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 45.0;

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Chart {
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

fn span(r: (f64, f64)) -> (f64, f64) {
    if r.1 > r.0 {
        r
    } else {
        (r.0 - 0.5, r.0 + 0.5)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn new(width: f64, height: f64, x: (f64, f64), y: (f64, f64)) -> Self {
        Self {
            width,
            height,
            x: span(x),
            y: span(y),
            body: String::new(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x.0) / (self.x.1 - self.x.0) * (self.width - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        self.height - MARGIN_B - (y - self.y.0) / (self.y.1 - self.y.0) * (self.height - MARGIN_T - MARGIN_B)
    }

    fn path(&self, pts: &[(f64, f64)]) -> String {
        let mut d = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.2},{:.2}",
                if i == 0 { "M" } else { " L" },
                self.px(x),
                self.py(y)
            );
        }
        d
    }

    pub fn title(&mut self, text: &str) -> &mut Self {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="18" font-size="14" text-anchor="middle">{}</text>"#,
            self.width / 2.0,
            esc(text)
        );
        self
    }

    /// Frame, ticks and axis labels. `x_ticks` pairs a position with its label.
    pub fn axes(&mut self, x_label: &str, y_label: &str, x_ticks: &[(f64, String)], y_ticks: &[f64]) -> &mut Self {
        let (l, r) = (MARGIN_L, self.width - MARGIN_R);
        let (t, b) = (MARGIN_T, self.height - MARGIN_B);
        let _ = writeln!(
            self.body,
            r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            r - l,
            b - t
        );
        for &v in y_ticks {
            let y = self.py(v);
            let _ = writeln!(
                self.body,
                r##"<line x1="{l:.2}" y1="{y:.2}" x2="{r:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{v:.2}</text>"##,
                l - 4.0,
                y + 3.0
            );
        }
        for (v, label) in x_ticks {
            let x = self.px(*v);
            let _ = writeln!(
                self.body,
                r##"<line x1="{x:.2}" y1="{b:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/><text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"##,
                b + 4.0,
                b + 15.0,
                esc(label)
            );
        }
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            (l + r) / 2.0,
            self.height - 8.0,
            esc(x_label)
        );
        let _ = writeln!(
            self.body,
            r#"<text x="14" y="{:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
            (t + b) / 2.0,
            (t + b) / 2.0,
            esc(y_label)
        );
        self
    }

    pub fn line(&mut self, pts: &[(f64, f64)], color: &str, width: f64) -> &mut Self {
        if !pts.is_empty() {
            let _ = writeln!(
                self.body,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="{width:.1}"/>"#,
                self.path(pts)
            );
        }
        self
    }

    /// Filled region between `lower` and `upper`, which share x positions.
    pub fn band(&mut self, lower: &[(f64, f64)], upper: &[(f64, f64)], color: &str, opacity: f64) -> &mut Self {
        if !lower.is_empty() {
            let mut pts: Vec<(f64, f64)> = upper.to_vec();
            pts.extend(lower.iter().rev());
            let _ = writeln!(
                self.body,
                r#"<path d="{} Z" fill="{color}" fill-opacity="{opacity:.2}" stroke="none"/>"#,
                self.path(&pts)
            );
        }
        self
    }

    /// Right-continuous step function through `pts`, starting at y = 0.
    pub fn steps(&mut self, pts: &[(f64, f64)], color: &str) -> &mut Self {
        let mut out = vec![(self.x.0, 0.0)];
        let mut prev = 0.0;
        for &(x, y) in pts {
            out.push((x, prev));
            out.push((x, y));
            prev = y;
        }
        out.push((self.x.1, prev));
        self.line(&out, color, 1.5)
    }

    /// Box from p25 to p75 with a median bar and whiskers to p5 and p95.
    pub fn boxplot(&mut self, x: f64, half_width: f64, b: &BoxStats, color: &str) -> &mut Self {
        let (x0, x1) = (self.px(x - half_width), self.px(x + half_width));
        let xm = self.px(x);
        let (y5, y25, y50, y75, y95) = (
            self.py(b.p5),
            self.py(b.p25),
            self.py(b.median),
            self.py(b.p75),
            self.py(b.p95),
        );
        let _ = writeln!(
            self.body,
            r##"<line x1="{xm:.2}" y1="{y5:.2}" x2="{xm:.2}" y2="{y95:.2}" stroke="#444"/><rect x="{x0:.2}" y="{y75:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.35" stroke="{color}"/><line x1="{x0:.2}" y1="{y50:.2}" x2="{x1:.2}" y2="{y50:.2}" stroke="#000" stroke-width="2"/>"##,
            x1 - x0,
            (y25 - y75).max(0.0)
        );
        self
    }

    /// Horizontal reference line.
    pub fn hline(&mut self, y: f64, color: &str) -> &mut Self {
        let yy = self.py(y);
        let _ = writeln!(
            self.body,
            r#"<line x1="{MARGIN_L:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="{color}" stroke-dasharray="4 3"/>"#,
            self.width - MARGIN_R
        );
        self
    }

    pub fn legend(&mut self, entries: &[(&str, &str)]) -> &mut Self {
        for (i, (label, color)) in entries.iter().enumerate() {
            let y = MARGIN_T + 14.0 + i as f64 * 14.0;
            let x = MARGIN_L + 10.0;
            let _ = writeln!(
                self.body,
                r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{color}"/><text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#,
                y - 9.0,
                x + 14.0,
                y,
                esc(label)
            );
        }
        self
    }

    pub fn finish(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// Several charts stacked vertically in one document.
pub fn stack(charts: &[Chart]) -> String {
    let width = charts.iter().map(|c| c.width).fold(0.0, f64::max);
    let height: f64 = charts.iter().map(|c| c.height).sum();
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    );
    let mut y = 0.0;
    for c in charts {
        let _ = writeln!(out, "<g transform=\"translate(0 {y})\">\n{}</g>", c.body);
        y += c.height;
    }
    out.push_str("</svg>\n");
    out
}
