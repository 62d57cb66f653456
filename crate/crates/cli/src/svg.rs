//! Static SVG figures: the boundary, orbit chords, tangency points and
//! optional auxiliary circles.

use olb_core::billiard::OrbitRow;
use olb_core::genfun;
use olb_core::{PlanePoint, SupportOval};
use std::f64::consts::TAU;
use std::fmt::Write;

pub const BOUNDARY_POINTS: usize = 720;
const MARGIN: f64 = 0.1;

#[derive(Debug, Default)]
pub struct Figure {
    pub boundary: Vec<PlanePoint>,
    pub chords: Vec<PlanePoint>,
    pub dots: Vec<PlanePoint>,
    pub circles: Vec<(PlanePoint, f64)>,
}

impl Figure {
    pub fn new(oval: &SupportOval) -> Self {
        Self {
            boundary: (0..BOUNDARY_POINTS)
                .map(|k| oval.point_at(TAU * k as f64 / BOUNDARY_POINTS as f64))
                .collect(),
            ..Self::default()
        }
    }

    /// Corners of the orbit joined in order, with the tangency points of
    /// every line.
    pub fn with_orbit(mut self, oval: &SupportOval, rows: &[OrbitRow], circles: bool) -> Self {
        self.chords = rows.iter().map(|r| PlanePoint::new(r.mx, r.my)).collect();
        for r in rows {
            self.dots.push(oval.point_at(r.alpha1));
            self.dots.push(oval.point_at(r.alpha2));
            if circles {
                let cfg = genfun::ChordConfig {
                    alpha1: r.alpha1,
                    alpha2: r.alpha2,
                };
                if let Ok((_, r2)) = genfun::radii(oval, &cfg) {
                    let g = oval.point_at(r.alpha2);
                    self.circles.push((g + r2 * PlanePoint::unit(r.alpha2), r2));
                }
            }
        }
        self
    }

    /// A closed circumscribed polygon given by its side normals.
    pub fn with_polygon(mut self, oval: &SupportOval, angles: &[f64]) -> Self {
        let n = angles.len();
        self.chords = (0..=n)
            .filter_map(|k| {
                let (a, b) = (angles[k % n], angles[(k + 1) % n]);
                olb_core::geom::support_lines_meet(a, oval.p(a), b, oval.p(b))
            })
            .collect();
        self.dots = angles.iter().map(|&a| oval.point_at(a)).collect();
        self
    }

    pub fn to_svg(&self, size: f64, stroke: f64) -> String {
        let pts = self.boundary.iter().chain(&self.chords).chain(&self.dots);
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts.filter(|p| p.is_finite()) {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-9);
        let pad = MARGIN * span;
        let (vx, vy) = (x0 - pad, -y1 - pad);
        let (vw, vh) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
        let unit = vw / size;
        let height = size * vh / vw;
        let path = |p: &[PlanePoint]| {
            p.iter()
                .map(|q| format!("{:.6},{:.6}", q.x, -q.y))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{height:.0}" viewBox="{vx:.6} {vy:.6} {vw:.6} {vh:.6}">"#
        );
        let _ = writeln!(s, r#"<rect x="{vx:.6}" y="{vy:.6}" width="{vw:.6}" height="{vh:.6}" fill="white"/>"#);
        for (c, r) in &self.circles {
            let _ = writeln!(
                s,
                r##"<circle cx="{:.6}" cy="{:.6}" r="{r:.6}" fill="none" stroke="#999999" stroke-width="{:.6}"/>"##,
                c.x,
                -c.y,
                0.5 * stroke * unit
            );
        }
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="none" stroke="black" stroke-width="{:.6}"/>"#,
            path(&self.boundary),
            stroke * unit
        );
        if self.chords.len() > 1 {
            let _ = writeln!(
                s,
                r##"<polyline points="{}" fill="none" stroke="#1f5fbf" stroke-width="{:.6}"/>"##,
                path(&self.chords),
                stroke * unit
            );
        }
        for d in &self.dots {
            let _ = writeln!(
                s,
                r##"<circle cx="{:.6}" cy="{:.6}" r="{:.6}" fill="#c0392b"/>"##,
                d.x,
                -d.y,
                2.0 * stroke * unit
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
