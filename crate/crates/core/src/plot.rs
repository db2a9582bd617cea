//! Deterministic SVG plots. Numbers are printed with fixed precision so the
//! same inputs always give byte-identical files.

use std::fmt::Write as _;

use crate::appeal::{IsoAnalysis, Raster};
use crate::mds::PerceptualConfiguration;
use crate::prefmap::AppealVectorPlot;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 56.0;
const COLORBAR_SPACE: f64 = 80.0;

/// Viridis, sampled at five stops.
const PALETTE: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

fn f(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Colour for `t` in `[0, 1]`, linear between palette stops.
pub fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (PALETTE.len() - 1) as f64;
    let i = (x.floor() as usize).min(PALETTE.len() - 2);
    let u = x - i as f64;
    let c: Vec<u8> = (0..3)
        .map(|k| (PALETTE[i][k] + u * (PALETTE[i + 1][k] - PALETTE[i][k])).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Round tick positions covering `[lo, hi]`.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo || target == 0 {
        return vec![lo];
    }
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

/// Data-to-pixel mapping for one plotting area.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64), right_space: f64) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self {
            x: widen(x),
            y: widen(y),
            left: MARGIN_LEFT,
            right: WIDTH - MARGIN_RIGHT - right_space,
            top: MARGIN_TOP,
            bottom: HEIGHT - MARGIN_BOTTOM,
        }
    }

    /// Padded square-ish bounds around points so nothing sits on the frame.
    fn around(xs: &[f64], ys: &[f64]) -> Self {
        let span = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo.is_finite() { (lo, hi) } else { (-1.0, 1.0) }
        };
        let (x, y) = (span(xs), span(ys));
        let pad = 0.12 * (x.1 - x.0).max(y.1 - y.0).max(1e-9);
        Self::new((x.0 - pad, x.1 + pad), (y.0 - pad, y.1 + pad), 0.0)
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * (self.right - self.left)
    }

    fn py(&self, y: f64) -> f64 {
        self.bottom - (y - self.y.0) / (self.y.1 - self.y.0) * (self.bottom - self.top)
    }

    fn header(&self, out: &mut String, title: &str) {
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
            w = WIDTH,
            h = HEIGHT
        );
        let _ = writeln!(out, "  <title>{}</title>", escape(title));
        let _ = writeln!(out, r#"  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"  <text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            f((self.left + self.right) / 2.0),
            escape(title)
        );
    }

    fn clip(&self, out: &mut String, id: &str) {
        let _ = writeln!(
            out,
            r#"  <clipPath id="{id}"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath>"#,
            f(self.left),
            f(self.top),
            f(self.right - self.left),
            f(self.bottom - self.top)
        );
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let _ = writeln!(
            out,
            r##"  <rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
            f(self.left),
            f(self.top),
            f(self.right - self.left),
            f(self.bottom - self.top)
        );
        out.push_str("  <g class=\"ticks\" stroke=\"#333\">\n");
        let xt = nice_ticks(self.x.0, self.x.1, 6);
        let yt = nice_ticks(self.y.0, self.y.1, 6);
        for &t in &xt {
            let x = f(self.px(t));
            let _ = writeln!(out, r#"    <line x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#, f(self.bottom), f(self.bottom + 5.0));
        }
        for &t in &yt {
            let y = f(self.py(t));
            let _ = writeln!(out, r#"    <line x1="{}" y1="{y}" x2="{}" y2="{y}"/>"#, f(self.left - 5.0), f(self.left));
        }
        out.push_str("  </g>\n  <g class=\"tick-labels\" fill=\"#333\">\n");
        for &t in &xt {
            let _ = writeln!(
                out,
                r#"    <text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                f(self.px(t)),
                f(self.bottom + 18.0),
                tick_label(t)
            );
        }
        for &t in &yt {
            let _ = writeln!(
                out,
                r#"    <text x="{}" y="{}" text-anchor="end">{}</text>"#,
                f(self.left - 8.0),
                f(self.py(t) + 4.0),
                tick_label(t)
            );
        }
        out.push_str("  </g>\n");
        let _ = writeln!(
            out,
            r#"  <text class="x-label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
            f((self.left + self.right) / 2.0),
            f(HEIGHT - 16.0),
            escape(x_label)
        );
        let cy = (self.top + self.bottom) / 2.0;
        let _ = writeln!(
            out,
            r#"  <text class="y-label" x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            f(cy),
            f(cy),
            escape(y_label)
        );
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn coords(config: &PerceptualConfiguration) -> (Vec<f64>, Vec<f64>) {
    let xs = config.points.iter().map(|p| p[0]).collect();
    let ys = config.points.iter().map(|p| p.get(1).copied().unwrap_or(0.0)).collect();
    (xs, ys)
}

fn scatter(out: &mut String, frame: &Frame, xs: &[f64], ys: &[f64], labels: &[String]) {
    out.push_str("  <g class=\"products\">\n");
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        let label = labels.get(i).cloned().unwrap_or_else(|| (i + 1).to_string());
        let (px, py) = (frame.px(*x), frame.py(*y));
        let _ = writeln!(
            out,
            r##"    <circle cx="{}" cy="{}" r="4" fill="#1f77b4"/><text x="{}" y="{}">{}</text>"##,
            f(px),
            f(py),
            f(px + 6.0),
            f(py - 6.0),
            escape(&label)
        );
    }
    out.push_str("  </g>\n");
}

/// Products in the first two perceptual dimensions.
pub fn perceptual_map_svg(config: &PerceptualConfiguration, labels: &[String]) -> String {
    let (xs, ys) = coords(config);
    let frame = Frame::around(&xs, &ys);
    let mut out = String::new();
    frame.header(&mut out, &format!("Perceptual space (stress {:.4})", config.stress));
    frame.axes(&mut out, "dimension 1", if config.dim > 1 { "dimension 2" } else { "" });
    scatter(&mut out, &frame, &xs, &ys, labels);
    out.push_str("</svg>\n");
    out
}

/// Perceptual map with the appeal direction and straight iso-appeal lines.
pub fn appeal_vector_svg(config: &PerceptualConfiguration, labels: &[String], plot: &AppealVectorPlot) -> String {
    let (xs, ys) = coords(config);
    let frame = Frame::around(&xs, &ys);
    let mut out = String::new();
    frame.header(&mut out, "Appeal vector in the perceptual space");
    frame.clip(&mut out, "area");
    frame.axes(&mut out, "dimension 1", "dimension 2");
    let reach = (frame.x.1 - frame.x.0).hypot(frame.y.1 - frame.y.0);
    out.push_str("  <g class=\"iso-lines\" clip-path=\"url(#area)\" stroke=\"#999\" stroke-dasharray=\"4 3\">\n");
    for line in &plot.iso_lines {
        let (p, d) = (line.point, line.direction);
        let _ = writeln!(
            out,
            r#"    <line data-level="{}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            tick_label(line.level),
            f(frame.px(p[0] - reach * d[0])),
            f(frame.py(p[1] - reach * d[1])),
            f(frame.px(p[0] + reach * d[0])),
            f(frame.py(p[1] + reach * d[1]))
        );
    }
    out.push_str("  </g>\n");
    let half = 0.35 * (frame.x.1 - frame.x.0).min(frame.y.1 - frame.y.0);
    let (o, d) = (plot.origin, plot.direction);
    let (x1, y1) = (frame.px(o[0]), frame.py(o[1]));
    let (x2, y2) = (frame.px(o[0] + half * d[0]), frame.py(o[1] + half * d[1]));
    let _ = writeln!(
        out,
        r##"  <defs><marker id="head" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="8" markerHeight="8" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#d62728"/></marker></defs>"##
    );
    let _ = writeln!(
        out,
        r##"  <line class="appeal-vector" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#d62728" stroke-width="2" marker-end="url(#head)"/>"##,
        f(x1),
        f(y1),
        f(x2),
        f(y2)
    );
    scatter(&mut out, &frame, &xs, &ys, labels);
    out.push_str("</svg>\n");
    out
}

/// Heatmap of a raster with a colour bar; colour is linear in appeal.
pub fn colormap_svg(raster: &Raster, title: &str) -> String {
    let frame = Frame::new((raster.d2_span.lo, raster.d2_span.hi), (raster.d3_span.lo, raster.d3_span.hi), COLORBAR_SPACE);
    let mut out = String::new();
    frame.header(&mut out, title);
    let nx = raster.d2.len();
    let ny = raster.d3.len();
    let (x0, x1) = frame.x;
    let (y0, y1) = frame.y;
    let range = raster.max - raster.min;
    let norm = |v: f64| if range > 0.0 { (v - raster.min) / range } else { 0.5 };
    out.push_str("  <g class=\"cells\" shape-rendering=\"crispEdges\">\n");
    for (row, values) in raster.values.iter().enumerate() {
        let ya = y0 + (y1 - y0) * row as f64 / ny as f64;
        let yb = y0 + (y1 - y0) * (row + 1) as f64 / ny as f64;
        for (col, v) in values.iter().enumerate() {
            let xa = x0 + (x1 - x0) * col as f64 / nx as f64;
            let xb = x0 + (x1 - x0) * (col + 1) as f64 / nx as f64;
            let _ = writeln!(
                out,
                r#"    <rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                f(frame.px(xa)),
                f(frame.py(yb)),
                f(frame.px(xb) - frame.px(xa)),
                f(frame.py(ya) - frame.py(yb)),
                color(norm(*v))
            );
        }
    }
    out.push_str("  </g>\n");
    frame.axes(&mut out, "d2 (cm)", "d3 (cm)");

    // Colour bar.
    let bx = frame.right + 24.0;
    let steps = 64;
    out.push_str("  <g class=\"colorbar\" shape-rendering=\"crispEdges\">\n");
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let yb = frame.bottom - (frame.bottom - frame.top) * k as f64 / steps as f64;
        let ya = frame.bottom - (frame.bottom - frame.top) * (k + 1) as f64 / steps as f64;
        let _ = writeln!(
            out,
            r#"    <rect x="{}" y="{}" width="16" height="{}" fill="{}"/>"#,
            f(bx),
            f(ya),
            f(yb - ya),
            color(t)
        );
    }
    out.push_str("  </g>\n");
    for t in nice_ticks(raster.min, raster.max, 5) {
        let y = frame.bottom - (frame.bottom - frame.top) * norm(t);
        let _ = writeln!(out, r#"  <text x="{}" y="{}">{}</text>"#, f(bx + 20.0), f(y + 4.0), tick_label(t));
    }
    let _ = writeln!(
        out,
        r#"  <text x="{}" y="{}" text-anchor="middle">appeal</text>"#,
        f(bx + 8.0),
        f(frame.top - 8.0)
    );
    out.push_str("</svg>\n");
    out
}

/// Iso-appeal polylines with their straight-line fits and the gradient field.
pub fn iso_lines_svg(analysis: &IsoAnalysis, title: &str) -> String {
    let r = &analysis.region;
    let frame = Frame::new((r.d2.lo, r.d2.hi), (r.d3.lo, r.d3.hi), 0.0);
    let mut out = String::new();
    frame.header(&mut out, title);
    frame.clip(&mut out, "area");
    frame.axes(&mut out, "d2 (cm)", "d3 (cm)");
    out.push_str("  <g class=\"iso-lines\" clip-path=\"url(#area)\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\">\n");
    let levels: Vec<f64> = analysis.levels.iter().filter(|l| !l.empty).map(|l| l.level).collect();
    let (lmin, lmax) = levels
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    for level in analysis.levels.iter().filter(|l| !l.empty) {
        let t = if lmax > lmin { (level.level - lmin) / (lmax - lmin) } else { 0.5 };
        for line in &level.polylines {
            let pts: Vec<String> = line
                .points
                .iter()
                .map(|p| format!("{},{}", f(frame.px(p[0])), f(frame.py(p[1]))))
                .collect();
            let _ = writeln!(
                out,
                r#"    <polyline data-level="{}" stroke="{}" points="{}"/>"#,
                tick_label(level.level),
                color(t),
                pts.join(" ")
            );
        }
        if let Some(last) = level.polylines.first().and_then(|l| l.points.last()) {
            let _ = writeln!(
                out,
                r##"    <text x="{}" y="{}" fill="#333" stroke="none">{}</text>"##,
                f(frame.px(last[0]) + 3.0),
                f(frame.py(last[1]) - 3.0),
                tick_label(level.level)
            );
        }
    }
    out.push_str("  </g>\n");

    // Gradient arrows share one scale so lengths compare.
    let gmax = analysis
        .gradient_field
        .iter()
        .map(|g| g.gradient[0].hypot(g.gradient[1]))
        .fold(0.0, f64::max);
    let m = (analysis.gradient_field.len() as f64).sqrt().max(1.0);
    let cell = ((frame.right - frame.left) / m).min((frame.bottom - frame.top) / m);
    out.push_str("  <g class=\"gradient\" stroke=\"#d62728\">\n");
    for g in &analysis.gradient_field {
        let (x, y) = (frame.px(g.d2), frame.py(g.d3));
        let len = if gmax > 0.0 { 0.4 * cell / gmax } else { 0.0 };
        // Pixel y grows downward.
        let (dx, dy) = (g.gradient[0] * len, -g.gradient[1] * len);
        let _ = writeln!(out, r#"    <line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, f(x), f(y), f(x + dx), f(y + dy));
        let _ = writeln!(out, r##"    <circle cx="{}" cy="{}" r="1.5" fill="#d62728" stroke="none"/>"##, f(x + dx), f(y + dy));
    }
    out.push_str("  </g>\n</svg>\n");
    out
}
