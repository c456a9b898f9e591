//! A small SVG plot writer: a framed data rectangle, marks in data
//! coordinates, min/max tick labels. Output depends only on the calls made.

use std::fmt::Write;

use crate::contour::Segment;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 60.0;

pub struct Plot {
    x: (f64, f64),
    y: (f64, f64),
    title: String,
    labels: (String, String),
    body: String,
    legend: Vec<(String, String)>,
}

/// Widen a degenerate range so the transform stays finite.
fn span(r: (f64, f64)) -> (f64, f64) {
    if !(r.0.is_finite() && r.1.is_finite()) {
        (0.0, 1.0)
    } else if r.1 > r.0 {
        r
    } else {
        let pad = 0.5 * (1.0 + r.0.abs());
        (r.0 - pad, r.1 + pad)
    }
}

/// Bounding range of `values`, ignoring non-finite entries.
pub fn range(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn num(v: f64) -> String {
    format!("{v:.2}")
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn new(x: (f64, f64), y: (f64, f64), title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            x: span(x),
            y: span(y),
            title: title.to_string(),
            labels: (x_label.to_string(), y_label.to_string()),
            body: String::new(),
            legend: Vec::new(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    pub fn circle(&mut self, x: f64, y: f64, radius: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="{radius}" fill="{fill}"/>"#,
            num(self.px(x)),
            num(self.py(y))
        );
    }

    /// Axis-aligned rectangle centered at `(x, y)` with data extents `w × h`.
    pub fn cell(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let (x0, x1) = (self.px(x - w / 2.0), self.px(x + w / 2.0));
        let (y0, y1) = (self.py(y + h / 2.0), self.py(y - h / 2.0));
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
            num(x0),
            num(y0),
            num(x1 - x0),
            num(y1 - y0)
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) {
        if points.is_empty() {
            return;
        }
        let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{},{}", num(self.px(x)), num(self.py(y)))).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            pts.join(" ")
        );
    }

    /// Disjoint segments drawn as one path.
    pub fn segments(&mut self, segments: &[Segment], stroke: &str, width: f64) {
        if segments.is_empty() {
            return;
        }
        let mut d = String::new();
        for ((x0, y0), (x1, y1)) in segments {
            let _ = write!(
                d,
                "M{} {}L{} {}",
                num(self.px(*x0)),
                num(self.py(*y0)),
                num(self.px(*x1)),
                num(self.py(*y1))
            );
        }
        let _ = writeln!(self.body, r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#);
    }

    pub fn legend(&mut self, label: &str, color: &str) {
        self.legend.push((label.to_string(), color.to_string()));
    }

    pub fn finish(self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            s,
            r#"<clipPath id="frame"><rect x="{l}" y="{t}" width="{}" height="{}"/></clipPath>"#,
            r - l,
            b - t
        );
        let _ = writeln!(s, r#"<g clip-path="url(#frame)">"#);
        s.push_str(&self.body);
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        );
        let text = |s: &mut String, x: f64, y: f64, anchor: &str, body: &str| {
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="{anchor}">{}</text>"#, num(x), num(y), escape(body));
        };
        text(&mut s, l, b + 18.0, "start", &tick(self.x.0));
        text(&mut s, r, b + 18.0, "end", &tick(self.x.1));
        text(&mut s, l - 6.0, b, "end", &tick(self.y.0));
        text(&mut s, l - 6.0, t + 10.0, "end", &tick(self.y.1));
        text(&mut s, (l + r) / 2.0, b + 36.0, "middle", &self.labels.0);
        text(&mut s, 16.0, (t + b) / 2.0, "middle", &self.labels.1);
        text(&mut s, (l + r) / 2.0, t - 20.0, "middle", &self.title);
        for (i, (label, color)) in self.legend.iter().enumerate() {
            let y = t + 16.0 + 16.0 * i as f64;
            let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#, r - 150.0, y - 9.0);
            text(&mut s, r - 134.0, y, "start", label);
        }
        s.push_str("</svg>\n");
        s
    }
}
