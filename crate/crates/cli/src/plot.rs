//! Bare-bones static SVG charts for the CSV outputs.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(points: &[(f64, f64)]) -> Frame {
        let span = |vals: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        Frame {
            x: span(&mut points.iter().map(|p| p.0)),
            y: span(&mut points.iter().map(|p| p.1)),
        }
    }

    fn px(&self, p: (f64, f64)) -> (f64, f64) {
        let u = (p.0 - self.x.0) / (self.x.1 - self.x.0);
        let v = (p.1 - self.y.0) / (self.y.1 - self.y.0);
        (PAD + u * (W - 2.0 * PAD), H - PAD - v * (H - 2.0 * PAD))
    }
}

fn open(title: &str, xlabel: &str, ylabel: &str, f: &Frame) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel} [{:.3}, {:.3}]</text>"#,
        W / 2.0,
        H - 15.0,
        f.x.0,
        f.x.1
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{ylabel} [{:.3}, {:.3}]</text>"#,
        H / 2.0,
        H / 2.0,
        f.y.0,
        f.y.1
    );
    s
}

/// Polyline of `ys` against their index.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, ys: &[f64]) -> String {
    let points: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect();
    let frame = Frame::fit(&points);
    let mut s = open(title, xlabel, ylabel, &frame);
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let (x, y) = frame.px(*p);
        let _ = write!(d, "{}{x:.2} {y:.2}", if i == 0 { "M" } else { " L" });
    }
    let _ = writeln!(
        s,
        r#"<path d="{d}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#
    );
    s.push_str("</svg>\n");
    s
}

/// Scatter plot with the `y = x` reference line.
pub fn scatter_chart(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)]) -> String {
    let mut frame = Frame::fit(points);
    let lo = frame.x.0.min(frame.y.0);
    let hi = frame.x.1.max(frame.y.1);
    frame.x = (lo, hi);
    frame.y = (lo, hi);
    let mut s = open(title, xlabel, ylabel, &frame);
    let (a, b) = (frame.px((lo, lo)), frame.px((hi, hi)));
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4"/>"#,
        a.0, a.1, b.0, b.1
    );
    for p in points {
        let (x, y) = frame.px(*p);
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.5" fill="steelblue"/>"#
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_series_still_renders() {
        let svg = line_chart("loss", "step", "loss", &[2.0, 2.0, 2.0]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("M50.00"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn empty_scatter_has_no_points() {
        let svg = scatter_chart("iou", "exact", "approx", &[]);
        assert!(!svg.contains("<circle"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
