//! Plain SVG renderings of the `(u, v)` chart `[0, 2π)²` of the torus.

use std::f64::consts::{PI, TAU};
use std::fmt::Write;

use torus_filippov::{Point, RegionKind, TorusSpec};

const SIZE: f64 = 512.0;
const MARGIN: f64 = 40.0;

pub struct Chart {
    body: String,
}

impl Default for Chart {
    fn default() -> Self {
        Self::new()
    }
}

fn x_of(u: f64) -> f64 {
    MARGIN + u / TAU * SIZE
}

fn y_of(v: f64) -> f64 {
    MARGIN + SIZE - v / TAU * SIZE
}

pub fn region_color(region: RegionKind) -> &'static str {
    match region {
        RegionKind::Sliding => "#9ecae1",
        RegionKind::Escaping => "#fdae6b",
        RegionKind::Tangency => "#636363",
        RegionKind::Crossing => "#e7298a",
    }
}

impl Chart {
    pub fn new() -> Self {
        Self {
            body: String::new(),
        }
    }

    /// Fills the chart cell `[u, u + du] × [v, v + dv]`.
    pub fn cell(&mut self, u: f64, v: f64, du: f64, dv: f64, color: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{color}"/>"#,
            x_of(u),
            y_of(v + dv),
            du / TAU * SIZE,
            dv / TAU * SIZE,
        );
    }

    /// Draws chart points as polylines, breaking where the curve wraps.
    pub fn curve(&mut self, uv: &[(f64, f64)], color: &str, width: f64, dashed: bool, closed: bool) {
        let mut pieces: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        let mut pts: Vec<(f64, f64)> = uv.to_vec();
        if closed && uv.len() > 1 {
            pts.push(uv[0]);
        }
        for (k, &p) in pts.iter().enumerate() {
            if k > 0 {
                let q = pts[k - 1];
                if (p.0 - q.0).abs() > PI || (p.1 - q.1).abs() > PI {
                    pieces.push(Vec::new());
                }
            }
            if let Some(last) = pieces.last_mut() {
                last.push(p);
            }
        }
        let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
        for piece in pieces.iter().filter(|p| p.len() > 1) {
            let coords: Vec<String> = piece
                .iter()
                .map(|&(u, v)| format!("{:.3},{:.3}", x_of(u), y_of(v)))
                .collect();
            let _ = writeln!(
                self.body,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"{dash}/>"#,
                coords.join(" ")
            );
        }
    }

    /// Draws space points through their nearest-torus chart coordinates.
    pub fn space_curve(&mut self, torus: &TorusSpec, pts: &[Point], color: &str, dashed: bool, closed: bool) {
        let uv: Vec<(f64, f64)> = pts.iter().map(|p| torus.chart_coords(p)).collect();
        self.curve(&uv, color, 1.5, dashed, closed);
    }

    pub fn finish(&self, title: &str) -> String {
        let total = SIZE + 2.0 * MARGIN;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
        );
        let _ = writeln!(out, r#"<rect width="{total}" height="{total}" fill="white"/>"#);
        out.push_str(&self.body);
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN}" y="{:.0}" font-family="sans-serif" font-size="14">{}</text>"#,
            MARGIN - 12.0,
            escape(title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.0}" y="{:.0}" font-family="sans-serif" font-size="12">u</text>"#,
            MARGIN + SIZE / 2.0,
            MARGIN + SIZE + 24.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.0}" y="{:.0}" font-family="sans-serif" font-size="12">v</text>"#,
            MARGIN - 24.0,
            MARGIN + SIZE / 2.0
        );
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapped_curves_are_split() {
        let mut c = Chart::new();
        c.curve(&[(6.0, 1.0), (6.2, 1.0), (0.1, 1.0), (0.3, 1.0)], "black", 1.0, false, false);
        let svg = c.finish("t");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg"));
    }
}
