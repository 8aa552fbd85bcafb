//! Minimal hand-written SVG: polylines and markers in data coordinates, with
//! the y axis flipped so that the picture reads like a plot.

use std::fmt::Write;

use zermelo_core::Position;

const STYLE: &str = "\
polyline{fill:none;stroke-width:1.5;vector-effect:non-scaling-stroke}
line{stroke-width:1;vector-effect:non-scaling-stroke}
.abnormal{stroke:#2ca02c;stroke-width:2.5}
.hyperbolic{stroke:#d62728}
.elliptic{stroke:#1f77b4;stroke-dasharray:4 3}
.front{stroke:#000}
.value{stroke:#000}
.boundary{stroke:#888;stroke-dasharray:2 3}
.cusp{fill:#000}
.jump{fill:#ff7f0e}
.origin{fill:#9467bd}";

enum Item {
    Polyline(&'static str, Vec<Position>),
    Marker(&'static str, Position),
    HLine(&'static str, f64),
    VLine(&'static str, f64),
}

#[derive(Default)]
pub struct Plot {
    items: Vec<Item>,
    lo: Option<Position>,
    hi: Option<Position>,
}

impl Plot {
    pub fn new() -> Self {
        Self::default()
    }

    fn include(&mut self, q: Position) {
        if !(q[0].is_finite() && q[1].is_finite()) {
            return;
        }
        let lo = self.lo.get_or_insert(q);
        *lo = [lo[0].min(q[0]), lo[1].min(q[1])];
        let hi = self.hi.get_or_insert(q);
        *hi = [hi[0].max(q[0]), hi[1].max(q[1])];
    }

    /// Adds a polyline, splitting it at non-finite points.
    pub fn polyline(&mut self, class: &'static str, pts: &[Position]) {
        for piece in pts.split(|q| !(q[0].is_finite() && q[1].is_finite())) {
            if piece.len() >= 2 {
                piece.iter().for_each(|&q| self.include(q));
                self.items.push(Item::Polyline(class, piece.to_vec()));
            }
        }
    }

    pub fn marker(&mut self, class: &'static str, q: Position) {
        self.include(q);
        self.items.push(Item::Marker(class, q));
    }

    /// Horizontal reference line, drawn only if it falls inside the data box.
    pub fn hline(&mut self, class: &'static str, y: f64) {
        self.items.push(Item::HLine(class, y));
    }

    pub fn vline(&mut self, class: &'static str, x: f64) {
        self.items.push(Item::VLine(class, x));
    }

    pub fn render(&self, title: &str) -> String {
        let lo = self.lo.unwrap_or([0.0, 0.0]);
        let hi = self.hi.unwrap_or([1.0, 1.0]);
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        let pad = 0.05 * span;
        let (x0, x1) = (lo[0] - pad, hi[0] + pad);
        let (y0, y1) = (lo[1] - pad, hi[1] + pad);
        let r = 0.008 * span;

        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="{}" viewBox="{} {} {} {}" preserveAspectRatio="xMidYMid meet">"#,
            (800.0 * (y1 - y0) / (x1 - x0)).clamp(200.0, 1600.0).round(),
            x0,
            -y1,
            x1 - x0,
            y1 - y0
        );
        let _ = writeln!(s, "<title>{title}</title>");
        let _ = writeln!(s, "<style>\n{STYLE}\n</style>");
        let _ = writeln!(s, r#"<g transform="scale(1,-1)">"#);
        for item in &self.items {
            match item {
                Item::Polyline(class, pts) => {
                    let _ = write!(s, r#"<polyline class="{class}" points=""#);
                    for (k, q) in pts.iter().enumerate() {
                        let sep = if k == 0 { "" } else { " " };
                        let _ = write!(s, "{sep}{},{}", q[0], q[1]);
                    }
                    let _ = writeln!(s, r#""/>"#);
                }
                Item::Marker(class, q) => {
                    let _ = writeln!(s, r#"<circle class="{class}" cx="{}" cy="{}" r="{r}"/>"#, q[0], q[1]);
                }
                Item::HLine(class, y) if *y >= y0 && *y <= y1 => {
                    let _ = writeln!(s, r#"<line class="{class}" x1="{x0}" y1="{y}" x2="{x1}" y2="{y}"/>"#);
                }
                Item::VLine(class, x) if *x >= x0 && *x <= x1 => {
                    let _ = writeln!(s, r#"<line class="{class}" x1="{x}" y1="{y0}" x2="{x}" y2="{y1}"/>"#);
                }
                _ => {}
            }
        }
        s.push_str("</g>\n</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_flipped_view_box() {
        let mut p = Plot::new();
        p.polyline("hyperbolic", &[[0.0, 0.0], [1.0, 2.0], [f64::NAN, 0.0], [3.0, 3.0]]);
        p.marker("cusp", [1.0, 1.0]);
        p.hline("boundary", 1.0);
        p.hline("boundary", 50.0);
        let s = p.render("t");
        assert_eq!(s.matches("<polyline").count(), 1);
        assert_eq!(s.matches("<line").count(), 1);
        assert!(s.contains("scale(1,-1)"));
        let vb: Vec<f64> = s
            .split("viewBox=\"")
            .nth(1)
            .and_then(|r| r.split('"').next())
            .unwrap()
            .split(' ')
            .map(|x| x.parse().unwrap())
            .collect();
        for (a, b) in vb.iter().zip([-0.1, -2.1, 1.2, 2.2]) {
            assert!((a - b).abs() < 1e-12, "{vb:?}");
        }
    }
}
