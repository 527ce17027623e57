//! Static SVG charts. Every plotted value is also written to a CSV file;
//! bars carry their value in a `data-value` attribute using the CSV
//! formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::csv::format_sig6;
use super::experiment::ReportBundle;
use crate::error::{Error, Result};

const FONT: &str = "font-family=\"sans-serif\" font-size=\"12\"";
const PALETTE: [&str; 4] = ["#4c72b0", "#dd8452", "#55a868", "#8172b3"];

struct Canvas {
    body: String,
}

impl Canvas {
    fn new(width: f64, height: f64, title: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
        );
        let _ = writeln!(body, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let _ = writeln!(
            body,
            "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" {FONT} font-size=\"14\">{title}</text>",
            width / 2.0
        );
        Canvas { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, attrs: &str) {
        let _ = writeln!(
            self.body,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" {attrs}/>"
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" {FONT}>{s}</text>"
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

/// Plot frame with a linear y axis from 0 to `y_max`.
struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    y_max: f64,
}

impl Frame {
    fn y(&self, v: f64) -> f64 {
        let v = v.clamp(0.0, self.y_max);
        self.bottom - (self.bottom - self.top) * v / self.y_max
    }

    fn axes(&self, c: &mut Canvas, y_label: &str) {
        c.line(self.left, self.bottom, self.right, self.bottom, "stroke=\"black\"");
        c.line(self.left, self.top, self.left, self.bottom, "stroke=\"black\"");
        for t in 0..=4 {
            let v = self.y_max * t as f64 / 4.0;
            let y = self.y(v);
            c.line(self.left - 4.0, y, self.left, y, "stroke=\"black\"");
            c.text(self.left - 6.0, y + 4.0, "end", &format_sig6(v));
        }
        let mid = (self.top + self.bottom) / 2.0;
        let _ = writeln!(
            c.body,
            "<text x=\"14\" y=\"{mid:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {mid:.2})\" {FONT}>{y_label}</text>"
        );
    }
}

fn nice_max(v: f64) -> f64 {
    if !(v.is_finite() && v > 0.0) {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if v <= m * mag {
            return m * mag;
        }
    }
    10.0 * mag
}

fn bar(c: &mut Canvas, f: &Frame, x: f64, w: f64, v: f64, color: &str, attrs: &str) {
    let top = if v.is_finite() { f.y(v) } else { f.top };
    let _ = writeln!(
        c.body,
        "<rect class=\"bar\" x=\"{x:.2}\" y=\"{top:.2}\" width=\"{w:.2}\" height=\"{:.2}\" fill=\"{color}\" {attrs} data-value=\"{}\"/>",
        f.bottom - top,
        format_sig6(v)
    );
    if !v.is_finite() {
        c.text(x + w / 2.0, f.top - 4.0, "middle", "inf");
    }
}

pub fn histogram_svg(bundle: &ReportBundle) -> String {
    let counts = bundle.histogram.counts();
    let mut c = Canvas::new(1100.0, 340.0, "Transitions per data bit position");
    let max = counts.iter().copied().max().unwrap_or(0) as f64;
    let f = Frame {
        left: 70.0,
        right: 1080.0,
        top: 40.0,
        bottom: 290.0,
        y_max: nice_max(max),
    };
    f.axes(&mut c, "transitions");
    let x = |i: usize| f.left + (f.right - f.left) * i as f64 / (counts.len() - 1) as f64;
    for w in 0..=8 {
        let xi = f.left + (f.right - f.left) * (64 * w) as f64 / 512.0;
        c.line(
            xi,
            f.top,
            xi,
            f.bottom,
            "class=\"word-boundary\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"",
        );
        if w < 8 {
            c.text(
                xi + 32.0 * (f.right - f.left) / 512.0,
                f.bottom + 16.0,
                "middle",
                &format!("word {w}"),
            );
        }
    }
    let points: Vec<String> = counts
        .iter()
        .enumerate()
        .map(|(i, &v)| format!("{:.2},{:.2}", x(i), f.y(v as f64)))
        .collect();
    let _ = writeln!(
        c.body,
        "<polyline class=\"series\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"{}\"/>",
        PALETTE[0],
        points.join(" ")
    );
    c.text(
        (f.left + f.right) / 2.0,
        f.bottom + 36.0,
        "middle",
        "bit position (flat index)",
    );
    c.finish()
}

pub fn variation_svg(bundle: &ReportBundle) -> String {
    let mut c = Canvas::new(640.0, 360.0, "Codeword transitions relative to uniform share");
    let max = bundle
        .schemes
        .iter()
        .filter_map(|s| s.stats.map(|st| st.max_avg_pct))
        .fold(100.0, f64::max);
    let f = Frame {
        left: 70.0,
        right: 620.0,
        top: 40.0,
        bottom: 300.0,
        y_max: nice_max(max),
    };
    f.axes(&mut c, "% of K/8");
    let n = bundle.schemes.len().max(1) as f64;
    let slot = (f.right - f.left) / n;
    let w = slot / 5.0;
    for (g, s) in bundle.schemes.iter().enumerate() {
        let x0 = f.left + slot * g as f64;
        let _ = writeln!(c.body, "<g class=\"scheme-group\" data-scheme=\"{}\">", s.scheme);
        if let Some(st) = &s.stats {
            for (i, (stat, v)) in [
                ("min_avg", st.min_avg_pct),
                ("mean", st.mean_pct),
                ("max_avg", st.max_avg_pct),
            ]
            .into_iter()
            .enumerate()
            {
                let attrs = format!("data-scheme=\"{}\" data-stat=\"{stat}\"", s.scheme);
                bar(&mut c, &f, x0 + w * (1.0 + i as f64), w, v, PALETTE[i], &attrs);
            }
        }
        let _ = writeln!(c.body, "</g>");
        c.text(x0 + slot / 2.0, f.bottom + 16.0, "middle", s.scheme.name());
    }
    for (i, label) in ["min", "avg", "max"].iter().enumerate() {
        let y = 40.0 + 16.0 * i as f64;
        let _ = writeln!(
            c.body,
            "<rect x=\"540\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>",
            y - 9.0,
            PALETTE[i]
        );
        c.text(556.0, y, "start", label);
    }
    c.finish()
}

pub fn error_increase_svg(bundle: &ReportBundle) -> String {
    let has_mc = bundle.schemes.iter().any(|s| s.monte_carlo.is_some());
    let mut c = Canvas::new(900.0, 360.0, "Block error rate and increase over the uniform bound");

    let inc_max = bundle
        .schemes
        .iter()
        .map(|s| s.increase_pct)
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let left = Frame {
        left: 70.0,
        right: 420.0,
        top: 40.0,
        bottom: 300.0,
        y_max: nice_max(inc_max),
    };
    left.axes(&mut c, "increase (%)");
    let n = bundle.schemes.len().max(1) as f64;
    let slot = (left.right - left.left) / n;
    for (g, s) in bundle.schemes.iter().enumerate() {
        let x0 = left.left + slot * g as f64;
        let attrs = format!("data-scheme=\"{}\" data-stat=\"increase_pct\"", s.scheme);
        bar(
            &mut c,
            &left,
            x0 + slot * 0.25,
            slot * 0.5,
            s.increase_pct.max(0.0),
            PALETTE[g % 4],
            &attrs,
        );
        c.text(x0 + slot / 2.0, left.bottom + 16.0, "middle", s.scheme.name());
    }

    let rate_max = bundle
        .schemes
        .iter()
        .flat_map(|s| {
            let mc = s.monte_carlo.map(|e| e.value + e.std_error).unwrap_or(0.0);
            [s.rates.rate, s.rates.optimal_rate, mc]
        })
        .fold(0.0, f64::max);
    let right = Frame {
        left: 520.0,
        right: 880.0,
        top: 40.0,
        bottom: 300.0,
        y_max: nice_max(rate_max),
    };
    right.axes(&mut c, "");
    c.text(470.0, 34.0, "start", "block error rate");
    let series = if has_mc { 3.0 } else { 2.0 };
    let slot = (right.right - right.left) / n;
    let w = slot / (series + 2.0);
    for (g, s) in bundle.schemes.iter().enumerate() {
        let x0 = right.left + slot * g as f64;
        let a = format!("data-scheme=\"{}\" data-stat=\"analytic_rate\"", s.scheme);
        bar(&mut c, &right, x0 + w, w, s.rates.rate, PALETTE[0], &a);
        let o = format!("data-scheme=\"{}\" data-stat=\"optimal_rate\"", s.scheme);
        bar(&mut c, &right, x0 + 2.0 * w, w, s.rates.optimal_rate, PALETTE[2], &o);
        if let Some(e) = &s.monte_carlo {
            let m = format!("data-scheme=\"{}\" data-stat=\"mc_rate\"", s.scheme);
            let xm = x0 + 3.0 * w;
            bar(&mut c, &right, xm, w, e.value, PALETTE[1], &m);
            let (lo, hi) = (right.y(e.value - e.std_error), right.y(e.value + e.std_error));
            let _ = writeln!(
                c.body,
                "<line class=\"mc-error\" x1=\"{0:.2}\" y1=\"{lo:.2}\" x2=\"{0:.2}\" y2=\"{hi:.2}\" stroke=\"black\" data-value=\"{1}\"/>",
                xm + w / 2.0,
                format_sig6(e.std_error)
            );
        }
        c.text(x0 + slot / 2.0, right.bottom + 16.0, "middle", s.scheme.name());
    }
    let mut legend = vec![("analytic", PALETTE[0]), ("uniform bound", PALETTE[2])];
    if has_mc {
        legend.push(("Monte Carlo", PALETTE[1]));
    }
    for (i, (label, color)) in legend.into_iter().enumerate() {
        let y = 56.0 + 16.0 * i as f64;
        let _ = writeln!(
            c.body,
            "<rect x=\"760\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>",
            y - 9.0
        );
        c.text(776.0, y, "start", label);
    }
    c.finish()
}

/// Writes `histogram.svg`, `variation.svg` and `error_increase.svg`.
pub fn emit_svg(bundle: &ReportBundle, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let charts = [
        ("histogram.svg", histogram_svg(bundle)),
        ("variation.svg", variation_svg(bundle)),
        ("error_increase.svg", error_increase_svg(bundle)),
    ];
    let mut written = Vec::new();
    for (name, body) in charts {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
