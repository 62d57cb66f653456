//! Convex polygons in support coordinates and the distribution spanned by
//! the rotations of each side about its excircle tangency point.
//!
//! Sides are indexed from 0 and cyclically; vertex `k` is the meet of sides
//! `k` and `k + 1`. Tangent vectors use the basis
//! `(d alpha_0, .., d alpha_{n-1}, d p_0, .., d p_{n-1})`.

use crate::error::{Error, Result};
use crate::forge::ParallelogramState;
use crate::geom::{support_lines_meet, PlanePoint};
use nalgebra::{DMatrix, Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::Write;

/// Relative singular value cutoff for numeric ranks.
pub const RANK_TOL: f64 = 1e-8;
/// Step of the flow commutator.
pub const FLOW_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonConfig {
    #[serde(rename = "α", alias = "alpha")]
    pub alpha: Vec<f64>,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVectorField {
    pub d_alpha: Vec<f64>,
    pub d_p: Vec<f64>,
}

impl TangentVectorField {
    pub fn zero(n: usize) -> Self {
        Self {
            d_alpha: vec![0.0; n],
            d_p: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.d_alpha.len() + self.d_p.len()
    }

    pub fn components(&self) -> Vec<f64> {
        self.d_alpha.iter().chain(&self.d_p).copied().collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.components().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_diff(&self, o: &Self) -> f64 {
        self.components()
            .iter()
            .zip(o.components())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Partials of `phi_i` with respect to the variables of sides `i - 1`, `i`,
/// `i + 1`, in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiPartials {
    pub d_alpha: [f64; 3],
    pub d_p: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Excircle {
    pub center: PlanePoint,
    pub radius: f64,
    pub tangency: PlanePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub n: usize,
    /// Rank of the fields together with their adjacent brackets.
    pub rank: usize,
    /// Rank of the matrix `theta_j([xi_i, xi_{i+1}])`.
    pub pairing_rank: usize,
    pub singular_values: Vec<f64>,
    /// Largest `|dF(v)|` over the spanning vectors.
    pub level_defect: f64,
}

impl GrowthReport {
    pub fn full(&self) -> bool {
        self.rank == 2 * self.n - 1
    }
}

fn gap_of(alpha: &[f64], i: usize) -> f64 {
    let n = alpha.len();
    if i + 1 < n {
        alpha[i + 1] - alpha[i]
    } else {
        alpha[0] + TAU - alpha[n - 1]
    }
}

fn raw_vertex(alpha: &[f64], p: &[f64], k: usize) -> PlanePoint {
    let n = alpha.len();
    let j = (k + 1) % n;
    let (s0, c0) = alpha[k].sin_cos();
    let (s1, c1) = alpha[j].sin_cos();
    let d = gap_of(alpha, k).sin();
    PlanePoint::new((p[k] * s1 - p[j] * s0) / d, (p[j] * c0 - p[k] * c1) / d)
}

fn raw_phi(alpha: &[f64], p: &[f64], i: usize) -> f64 {
    let n = alpha.len();
    let (im, ip) = ((i + n - 1) % n, (i + 1) % n);
    let (gm, gp) = (gap_of(alpha, im), gap_of(alpha, i));
    let (cm, cp) = ((0.5 * gm).cos(), (0.5 * gp).cos());
    let num = cm * cm * (p[ip] + p[i]) - cp * cp * (p[im] + p[i]);
    num / (2.0 * (0.5 * (gm + gp)).sin() * cm * cp)
}

fn raw_perimeter(alpha: &[f64], p: &[f64]) -> f64 {
    let n = alpha.len();
    (0..n).map(|i| (p[i] + p[(i + 1) % n]) * (0.5 * gap_of(alpha, i)).tan()).sum()
}

/// Longest RK4 substep of a flow; short flows still take four.
const FLOW_SUBSTEP: f64 = 2.5e-4;

fn rk4_flow(alpha: &mut [f64], p: &mut [f64], i: usize, t: f64) {
    let substeps = ((t.abs() / FLOW_SUBSTEP).ceil() as usize).max(4);
    let h = t / substeps as f64;
    for _ in 0..substeps {
        let a0 = alpha[i];
        let p0 = p[i];
        let mut f = |da: f64, dp: f64| {
            alpha[i] = a0 + da;
            p[i] = p0 + dp;
            raw_phi(alpha, p, i)
        };
        let k1 = f(0.0, 0.0);
        let k2 = f(0.5 * h, 0.5 * h * k1);
        let k3 = f(0.5 * h, 0.5 * h * k2);
        let k4 = f(h, h * k3);
        alpha[i] = a0 + h;
        p[i] = p0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

fn numeric_rank(m: &DMatrix<f64>) -> (usize, Vec<f64>) {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * top).count();
    (rank, sv)
}

impl PolygonConfig {
    /// Angles are unwrapped so that each follows its predecessor by the gap
    /// taken mod `2 pi`.
    pub fn new(alpha: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let n = alpha.len();
        if n < 3 {
            return Err(Error::DegeneratePolygon(format!("need at least 3 sides, got {n}")));
        }
        if p.len() != n {
            return Err(Error::DegeneratePolygon(format!("{n} angles but {} support values", p.len())));
        }
        if alpha.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::DegeneratePolygon("non-finite coordinate".into()));
        }
        let mut unwrapped = Vec::with_capacity(n);
        unwrapped.push(alpha[0]);
        for k in 1..n {
            let g = (alpha[k] - alpha[k - 1]).rem_euclid(TAU);
            unwrapped.push(unwrapped[k - 1] + g);
        }
        let poly = Self { alpha: unwrapped, p };
        poly.check()?;
        Ok(poly)
    }

    pub fn regular(n: usize, r: f64, phase: f64) -> Result<Self> {
        Self::new((0..n).map(|k| phase + TAU * k as f64 / n as f64).collect(), vec![r; n])
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: Self = serde_json::from_str(s).map_err(|e| Error::DegeneratePolygon(e.to_string()))?;
        Self::new(raw.alpha, raw.p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polygon serializes")
    }

    /// The 4-gon with sides `(a1, p1), (a2, p2), (a1 + pi, p1), (a2 + pi, p2)`.
    pub fn from_parallelogram(s: &ParallelogramState) -> Result<Self> {
        let sides = s.sides();
        Self::new(sides.iter().map(|x| x.0).collect(), sides.iter().map(|x| x.1).collect())
    }

    pub fn check(&self) -> Result<()> {
        for i in 0..self.n() {
            let g = self.gap(i);
            if !(g > 0.0 && g < PI) {
                return Err(Error::DegeneratePolygon(format!("gap {g} after side {i} outside (0, pi)")));
            }
        }
        if let Some(k) = self.vertices().iter().position(|v| !v.is_finite()) {
            return Err(Error::DegeneratePolygon(format!("vertex {k} is not finite")));
        }
        let sides = self.side_lengths();
        if let Some(i) = sides.iter().position(|&l| !(l > 0.0)) {
            return Err(Error::DegeneratePolygon(format!("side {i} has length {}", sides[i])));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    fn prev(&self, i: usize) -> usize {
        (i + self.n() - 1) % self.n()
    }

    fn next(&self, i: usize) -> usize {
        (i + 1) % self.n()
    }

    /// `alpha_{i+1} - alpha_i`, twice the half exterior angle at vertex `i`.
    pub fn gap(&self, i: usize) -> f64 {
        gap_of(&self.alpha, i)
    }

    /// Meet of sides `k` and `k + 1`.
    pub fn vertex(&self, k: usize) -> PlanePoint {
        raw_vertex(&self.alpha, &self.p, k)
    }

    pub fn vertices(&self) -> Vec<PlanePoint> {
        (0..self.n()).map(|k| self.vertex(k)).collect()
    }

    /// Vertices from a direct solve of each pair of line equations.
    pub fn vertices_by_intersection(&self) -> Result<Vec<PlanePoint>> {
        (0..self.n())
            .map(|k| {
                let j = self.next(k);
                support_lines_meet(self.alpha[k], self.p[k], self.alpha[j], self.p[j])
                    .ok_or_else(|| Error::DegeneratePolygon(format!("sides {k} and {j} are parallel")))
            })
            .collect()
    }

    pub fn side_length(&self, i: usize) -> f64 {
        let (im, ip) = (self.prev(i), self.next(i));
        let (gm, gp) = (self.gap(im), self.gap(i));
        self.p[im] / gm.sin() + self.p[ip] / gp.sin() - self.p[i] * (gm + gp).sin() / (gm.sin() * gp.sin())
    }

    pub fn side_lengths(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.side_length(i)).collect()
    }

    pub fn perimeter(&self) -> f64 {
        raw_perimeter(&self.alpha, &self.p)
    }

    pub fn side_length_and_perimeter(&self) -> (Vec<f64>, f64) {
        (self.side_lengths(), self.perimeter())
    }

    /// Closed-form `phi_i`.
    pub fn phi(&self, i: usize) -> f64 {
        raw_phi(&self.alpha, &self.p, i)
    }

    /// Tangency point on side `i` of the circle touching sides `i - 1`,
    /// `i`, `i + 1` from outside side `i`, by weighting the adjacent vertices.
    pub fn tangency_point(&self, i: usize) -> PlanePoint {
        let im = self.prev(i);
        let cm = 1.0 / (0.5 * self.gap(im)).tan();
        let cp = 1.0 / (0.5 * self.gap(i)).tan();
        (self.vertex(i) * cm + self.vertex(im) * cp) * (1.0 / (cm + cp))
    }

    /// `phi_i` as the determinant of the unit normal of side `i` and the
    /// tangency point.
    pub fn phi_by_determinant(&self, i: usize) -> f64 {
        PlanePoint::unit(self.alpha[i]).cross(self.tangency_point(i))
    }

    /// The same circle from its three tangency conditions.
    pub fn excircle(&self, i: usize) -> Result<Excircle> {
        let (im, ip) = (self.prev(i), self.next(i));
        let row = |k: usize, s: f64| {
            let (sn, cs) = self.alpha[k].sin_cos();
            [cs, sn, s]
        };
        let (a, b, c) = (row(im, 1.0), row(ip, 1.0), row(i, -1.0));
        let m = Matrix3::new(a[0], a[1], a[2], b[0], b[1], b[2], c[0], c[1], c[2]);
        let x = m
            .lu()
            .solve(&Vector3::new(self.p[im], self.p[ip], self.p[i]))
            .ok_or_else(|| Error::DegeneratePolygon(format!("no circle tangent to sides around {i}")))?;
        let center = PlanePoint::new(x[0], x[1]);
        let radius = x[2];
        Ok(Excircle {
            center,
            radius,
            tangency: center - PlanePoint::unit(self.alpha[i]) * radius,
        })
    }

    pub fn phi_partials(&self, i: usize) -> PhiPartials {
        let (im, ip) = (self.prev(i), self.next(i));
        let (gm, gp) = (self.gap(im), self.gap(i));
        let (sm, cm) = (0.5 * gm).sin_cos();
        let (sp, cp) = (0.5 * gp).sin_cos();
        let (ss, cs) = (0.5 * (gm + gp)).sin_cos();
        let (qp, qm) = (self.p[ip] + self.p[i], self.p[im] + self.p[i]);
        let num = cm * cm * qp - cp * cp * qm;
        let den = 2.0 * ss * cm * cp;
        let dn_m = -cm * sm * qp;
        let dn_p = cp * sp * qm;
        let dd_m = cs * cm * cp - ss * sm * cp;
        let dd_p = cs * cm * cp - ss * cm * sp;
        let d2 = den * den;
        let dphi_m = (dn_m * den - num * dd_m) / d2;
        let dphi_p = (dn_p * den - num * dd_p) / d2;
        PhiPartials {
            d_alpha: [-dphi_m, dphi_m - dphi_p, dphi_p],
            d_p: [-cp * cp / den, (cm * cm - cp * cp) / den, cm * cm / den],
        }
    }

    /// `xi_i = d alpha_i + phi_i d p_i`.
    pub fn xi(&self, i: usize) -> TangentVectorField {
        let mut v = TangentVectorField::zero(self.n());
        v.d_alpha[i] = 1.0;
        v.d_p[i] = self.phi(i);
        v
    }

    /// `xi_i(phi_j)`.
    fn xi_of_phi(&self, i: usize, j: usize) -> f64 {
        let d = self.phi_partials(j);
        let idx = [self.prev(j), j, self.next(j)];
        let phi_i = self.phi(i);
        idx.iter()
            .enumerate()
            .filter(|(_, &k)| k == i)
            .map(|(s, _)| d.d_alpha[s] + phi_i * d.d_p[s])
            .sum()
    }

    /// Closed-form `[xi_i, xi_j] = xi_i(phi_j) d p_j - xi_j(phi_i) d p_i`.
    pub fn xi_bracket(&self, i: usize, j: usize) -> TangentVectorField {
        let mut v = TangentVectorField::zero(self.n());
        if i != j {
            v.d_p[j] += self.xi_of_phi(i, j);
            v.d_p[i] -= self.xi_of_phi(j, i);
        }
        v
    }

    /// Time-`t` flow of `xi_i`.
    pub fn flow(&self, i: usize, t: f64) -> Self {
        let mut out = self.clone();
        rk4_flow(&mut out.alpha, &mut out.p, i, t);
        out
    }

    fn commutator_quotient(&self, i: usize, j: usize, h: f64) -> Vec<f64> {
        let (mut a, mut p) = (self.alpha.clone(), self.p.clone());
        rk4_flow(&mut a, &mut p, i, h);
        rk4_flow(&mut a, &mut p, j, h);
        rk4_flow(&mut a, &mut p, i, -h);
        rk4_flow(&mut a, &mut p, j, -h);
        a.iter()
            .chain(&p)
            .zip(self.alpha.iter().chain(&self.p))
            .map(|(x, y)| (x - y) / (h * h))
            .collect()
    }

    /// `[xi_i, xi_j]` from the flow commutator at steps `h` and `h / 2`,
    /// Richardson-combined to cancel the first-order error.
    pub fn xi_bracket_flow(&self, i: usize, j: usize, h: f64) -> TangentVectorField {
        let n = self.n();
        let coarse = self.commutator_quotient(i, j, h);
        let fine = self.commutator_quotient(i, j, 0.5 * h);
        let c: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| 2.0 * f - c).collect();
        TangentVectorField {
            d_alpha: c[..n].to_vec(),
            d_p: c[n..].to_vec(),
        }
    }

    /// `theta_j(v) = v_{p_j} - phi_j v_{alpha_j}`.
    pub fn theta(&self, j: usize, v: &TangentVectorField) -> f64 {
        v.d_p[j] - self.phi(j) * v.d_alpha[j]
    }

    /// Gradient of the perimeter.
    pub fn perimeter_gradient(&self) -> TangentVectorField {
        let n = self.n();
        let mut g = TangentVectorField::zero(n);
        for i in 0..n {
            let im = self.prev(i);
            let (tm, tp) = ((0.5 * self.gap(im)).tan(), (0.5 * self.gap(i)).tan());
            g.d_p[i] = tm + tp;
            g.d_alpha[i] = 0.5 * (self.p[im] + self.p[i]) * (1.0 + tm * tm)
                - 0.5 * (self.p[i] + self.p[self.next(i)]) * (1.0 + tp * tp);
        }
        g
    }

    fn pair(g: &TangentVectorField, v: &TangentVectorField) -> f64 {
        g.components().iter().zip(v.components()).map(|(a, b)| a * b).sum()
    }

    /// `D_{xi_i} F`.
    pub fn perimeter_derivative_along_xi(&self, i: usize) -> f64 {
        Self::pair(&self.perimeter_gradient(), &self.xi(i))
    }

    /// `D_{xi_i} F` from the perimeter along the flow, central difference
    /// with Richardson extrapolation.
    pub fn perimeter_derivative_by_flow(&self, i: usize, h: f64) -> f64 {
        let d = |h: f64| (self.flow(i, h).perimeter() - self.flow(i, -h).perimeter()) / (2.0 * h);
        (4.0 * d(0.5 * h) - d(h)) / 3.0
    }

    pub fn growth_report(&self) -> GrowthReport {
        let n = self.n();
        let mut vectors: Vec<TangentVectorField> = (0..n).map(|i| self.xi(i)).collect();
        let brackets: Vec<TangentVectorField> = (0..n).map(|i| self.xi_bracket(i, self.next(i))).collect();
        vectors.extend(brackets.iter().cloned());
        let m = DMatrix::from_fn(2 * n, vectors.len(), |r, c| vectors[c].components()[r]);
        let (rank, singular_values) = numeric_rank(&m);
        let pairing = DMatrix::from_fn(n, n, |j, i| self.theta(j, &brackets[i]));
        let (pairing_rank, _) = numeric_rank(&pairing);
        let g = self.perimeter_gradient();
        let level_defect = vectors.iter().map(|v| Self::pair(&g, v).abs()).fold(0.0, f64::max);
        GrowthReport {
            n,
            rank,
            pairing_rank,
            singular_values,
            level_defect,
        }
    }

    /// Same polygon with support values taken from the point `c`.
    pub fn recentred(&self, c: PlanePoint) -> Self {
        Self {
            alpha: self.alpha.clone(),
            p: self
                .alpha
                .iter()
                .zip(&self.p)
                .map(|(&a, &p)| p - PlanePoint::unit(a).dot(c))
                .collect(),
        }
    }

    /// Incenter of a triangle.
    pub fn incenter(&self) -> Result<PlanePoint> {
        if self.n() != 3 {
            return Err(Error::DegeneratePolygon(format!("incenter needs a triangle, got {} sides", self.n())));
        }
        // vertex k is opposite side k + 2
        let v = self.vertices();
        let l = self.side_lengths();
        let w = [l[2], l[0], l[1]];
        let s: f64 = w.iter().sum();
        Ok((v[0] * w[0] + v[1] * w[1] + v[2] * w[2]) * (1.0 / s))
    }

    pub fn incenter_recentre(&self) -> Result<Self> {
        Ok(self.recentred(self.incenter()?))
    }

    /// Recentred at the mean of the vertices, the center of a regular polygon.
    pub fn vertex_centroid_recentre(&self) -> Self {
        let v = self.vertices();
        let c = v.iter().fold(PlanePoint::new(0.0, 0.0), |acc, &x| acc + x) * (1.0 / v.len() as f64);
        self.recentred(c)
    }

    /// Per-side CSV: index, both `phi` routes, side length, `D_{xi_i} F`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,alpha,p,phi,phi_det,side_length,d_xi_perimeter")?;
        for i in 0..self.n() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                i,
                self.alpha[i],
                self.p[i],
                self.phi(i),
                self.phi_by_determinant(i),
                self.side_length(i),
                self.perimeter_derivative_along_xi(i)
            )?;
        }
        Ok(())
    }
}

/// `dp` of the rotation about `point` of the line with normal angle `alpha`
/// (the `d alpha` coefficient is 1).
pub fn rotation_field(point: PlanePoint, alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    point.y * c - point.x * s
}

pub fn batch_growth(polys: &[PolygonConfig]) -> Vec<GrowthReport> {
    polys.par_iter().map(|p| p.growth_report()).collect()
}

/// Fields and forms of the parallelogram family in coordinates
/// `(alpha1, alpha2, p1, p2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParallelogramFields {
    pub xi1: [f64; 4],
    pub xi2: [f64; 4],
    /// `[xi1, xi2]`.
    pub bracket: [f64; 4],
    pub lambda: [f64; 4],
    /// Differential of the perimeter `4 (p1 + p2) / sin(alpha2 - alpha1)`.
    pub d_f: [f64; 4],
}

fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ParallelogramFields {
    pub fn lambda_on(&self, v: &[f64; 4]) -> f64 {
        dot4(&self.lambda, v)
    }

    pub fn d_f_on(&self, v: &[f64; 4]) -> f64 {
        dot4(&self.d_f, v)
    }
}

/// Tolerance on `p1 + p2 - sin(omega)` for the perimeter-4 level.
pub const PARALLELOGRAM_LEVEL_TOL: f64 = 1e-9;

pub fn parallelogram_fields(state: &ParallelogramState) -> Result<ParallelogramFields> {
    let w = state.omega();
    if !(w > 0.0 && w < PI) {
        return Err(Error::GapDomain { omega: w, lo: 0.0, hi: PI });
    }
    let defect = state.normalization_defect();
    if !(defect.abs() <= PARALLELOGRAM_LEVEL_TOL) {
        return Err(Error::NotNormalized { value: defect });
    }
    let (sw, cw) = w.sin_cos();
    let q = state.p1 + state.p2;
    Ok(ParallelogramFields {
        xi1: [1.0, 0.0, -cw, 0.0],
        xi2: [0.0, 1.0, 0.0, cw],
        bracket: [0.0, 0.0, -sw, sw],
        lambda: [cw, cw, 1.0, -1.0],
        d_f: [4.0 * q * cw / (sw * sw), -4.0 * q * cw / (sw * sw), 4.0 / sw, 4.0 / sw],
    })
}

/// Triangle quantities at unit inradius about the incenter, in terms of the
/// half exterior angles `u, v, w` (`alpha_2 - alpha_1 = 2u`, and so on).
///
/// `w`, `u`, `a`, `b`, `expression` are the tabulated values. The `bracket_*`
/// fields come from the bracket definitions
/// `[xi_1, xi_2] = W_2 d p_2 - U_1 d p_1` (and cyclically), which exchange
/// the two tables; the resulting six-term sum has every term positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleWU {
    pub w: [f64; 3],
    pub u: [f64; 3],
    pub a: f64,
    pub b: f64,
    pub expression: f64,
    pub bracket_w: [f64; 3],
    pub bracket_u: [f64; 3],
    pub bracket_a: f64,
    pub bracket_b: f64,
    pub bracket_expression: f64,
}

/// Half exterior angles `u, v, w` with `u + v + w = pi`, each in `(0, pi/2)`.
pub fn triangle_wu(u: f64, v: f64, w: f64) -> Result<TriangleWU> {
    let ok = |x: f64| x > 0.0 && x < 0.5 * PI;
    if !(ok(u) && ok(v) && ok(w)) {
        return Err(Error::TriangleDomain(format!("({u}, {v}, {w}) not all in (0, pi/2)")));
    }
    if (u + v + w - PI).abs() > 1e-12 {
        return Err(Error::TriangleDomain(format!("u + v + w = {} instead of pi", u + v + w)));
    }
    let (tu, tv, tw) = (u.tan(), v.tan(), w.tan());
    let (s2u, s2v, s2w) = ((2.0 * u).sin(), (2.0 * v).sin(), (2.0 * w).sin());
    let (su2, sv2, sw2) = (u.sin().powi(2), v.sin().powi(2), w.sin().powi(2));
    let (cu2, cv2, cw2) = (u.cos().powi(2), v.cos().powi(2), w.cos().powi(2));
    let w_tab = [tu / s2v, tv / s2w, tw / s2u];
    let u_tab = [tw / s2v, tu / s2w, tv / s2u];
    let expression =
        -1.0 / (cw2 * tu) - tw / su2 - tv / (cw2 * tu * tu) - tv / su2 - 1.0 / (cv2 * tu) - tw / (cv2 * tu * tu);
    let bracket_expression =
        tu / sw2 + 1.0 / (cu2 * tw) + tu * tu / (tv * sw2) + 1.0 / (cu2 * tv) + tu / sv2 + tu * tu / (tw * sv2);
    Ok(TriangleWU {
        w: w_tab,
        u: u_tab,
        a: -tv / tu,
        b: -tw / tu,
        expression,
        bracket_w: u_tab,
        bracket_u: w_tab,
        bracket_a: -tu / tv,
        bracket_b: -tu / tw,
        bracket_expression,
    })
}

type AngleFn = dyn Fn(f64, f64, f64) -> f64;

/// `2 (xi_1(b) + a xi_3(b) - xi_2(a) - b xi_3(a))` with
/// `d alpha_1 = (d w - d u)/2`, `d alpha_2 = (d u - d v)/2`,
/// `d alpha_3 = (d v - d w)/2`, by central differences in `(u, v, w)`.
pub fn obstruction_by_differences(a: &AngleFn, b: &AngleFn, uvw: [f64; 3], h: f64) -> f64 {
    let d = |f: &AngleFn, k: usize| {
        let (mut plus, mut minus) = (uvw, uvw);
        plus[k] += h;
        minus[k] -= h;
        (f(plus[0], plus[1], plus[2]) - f(minus[0], minus[1], minus[2])) / (2.0 * h)
    };
    let xi1 = |f: &AngleFn| 0.5 * (d(f, 2) - d(f, 0));
    let xi2 = |f: &AngleFn| 0.5 * (d(f, 0) - d(f, 1));
    let xi3 = |f: &AngleFn| 0.5 * (d(f, 1) - d(f, 2));
    let (av, bv) = (a(uvw[0], uvw[1], uvw[2]), b(uvw[0], uvw[1], uvw[2]));
    2.0 * (xi1(b) + av * xi3(b) - xi2(a) - bv * xi3(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn random_polygon(rng: &mut ChaCha8Rng, n: usize) -> PolygonConfig {
        loop {
            let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x *= TAU / s);
            if w.iter().any(|&g| g >= PI - 0.05) {
                continue;
            }
            let mut a = vec![rng.random_range(0.0..TAU)];
            for g in &w[..n - 1] {
                a.push(a.last().unwrap() + g);
            }
            let p = (0..n).map(|_| rng.random_range(0.8..1.2)).collect();
            if let Ok(poly) = PolygonConfig::new(a, p) {
                return poly;
            }
        }
    }

    #[test]
    fn square_and_triangle() {
        let sq = PolygonConfig::new(vec![0.0, FRAC_PI_2, PI, 1.5 * PI], vec![1.0; 4]).unwrap();
        let v = sq.vertex(0);
        assert!((v.x - 1.0).abs() < 1e-15 && (v.y - 1.0).abs() < 1e-15);
        assert!((sq.perimeter() - 8.0).abs() < 1e-14);
        let tri = PolygonConfig::regular(3, 1.0, 0.0).unwrap();
        for v in tri.vertices() {
            assert!((v.norm() - 2.0).abs() < 1e-14);
        }
        assert!((tri.perimeter() - 6.0 * 3f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn angles_are_unwrapped() {
        let poly = PolygonConfig::new(vec![5.0, 0.5, 2.5], vec![1.0; 3]).unwrap();
        assert!(poly.alpha.windows(2).all(|w| w[1] > w[0]));
        assert!(PolygonConfig::new(vec![0.0, 0.1, 0.2], vec![1.0; 3]).is_err());
        assert!(PolygonConfig::new(vec![0.0, 2.0], vec![1.0; 2]).is_err());
    }

    #[test]
    fn geometry_matches_euclid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 3..=8 {
            for _ in 0..20 {
                let poly = random_polygon(&mut rng, n);
                let v = poly.vertices();
                let w = poly.vertices_by_intersection().unwrap();
                for k in 0..n {
                    assert!(v[k].dist(w[k]) < 1e-12);
                    let euclid = v[k].dist(v[(k + n - 1) % n]);
                    assert!((poly.side_length(k) - euclid).abs() < 1e-10);
                }
                let total: f64 = poly.side_lengths().iter().sum();
                assert!((poly.perimeter() - total).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn phi_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 3..=8 {
            for _ in 0..20 {
                let poly = random_polygon(&mut rng, n);
                for i in 0..n {
                    let q = poly.phi(i);
                    assert!((q - poly.phi_by_determinant(i)).abs() < 1e-11);
                    let e = poly.excircle(i).unwrap();
                    assert!(e.radius > 0.0);
                    assert!(e.tangency.dist(poly.tangency_point(i)) < 1e-11);
                }
            }
        }
    }

    #[test]
    fn phi_vanishes_on_regular_polygons() {
        for n in 3..=8 {
            for r in [1.0, 2.5] {
                let poly = PolygonConfig::regular(n, r, 0.3).unwrap();
                for i in 0..n {
                    assert!(poly.phi(i).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn unit_support_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 3..=8 {
            let mut poly = random_polygon(&mut rng, n);
            poly.p = vec![1.0; n];
            for i in 0..n {
                let j = (i + 1) % n;
                let want = (0.5 * poly.gap(j)).tan() - (0.5 * poly.gap(i)).tan();
                assert!((poly.phi(j) - want).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn excircle_tangency_on_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let poly = random_polygon(&mut rng, 3).incenter_recentre().unwrap();
            let r = poly.p[0];
            assert!(poly.p.iter().all(|&q| (q - r).abs() < 1e-12));
            let v = poly.vertices();
            for i in 0..3 {
                // side i runs from y to z; x is the opposite vertex
                let (y, z, x) = (v[(i + 2) % 3], v[i], v[(i + 1) % 3]);
                let s = 0.5 * (y.dist(z) + z.dist(x) + x.dist(y));
                let t = y + (z - y) * ((s - x.dist(y)) / y.dist(z));
                assert!(t.dist(poly.tangency_point(i)) < 1e-10);
            }
        }
    }

    #[test]
    fn rotation_field_values() {
        assert_eq!(rotation_field(PlanePoint::new(0.0, 0.0), 1.3), 0.0);
        assert!(rotation_field(PlanePoint::new(1.0, 0.0), 0.0).abs() < 1e-15);
        assert!((rotation_field(PlanePoint::new(1.0, 0.0), FRAC_PI_2) + 1.0).abs() < 1e-15);
        let x = PlanePoint::new(0.4, -1.1);
        let support = |a: f64| PlanePoint::unit(a).dot(x);
        for k in 0..20 {
            let a = 0.3 * k as f64;
            let h = 1e-5;
            let fd = (support(a + h) - support(a - h)) / (2.0 * h);
            assert!((fd - rotation_field(x, a)).abs() < 1e-7);
        }
    }

    #[test]
    fn partials_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        for n in 3..=7 {
            let poly = random_polygon(&mut rng, n);
            for i in 0..n {
                let d = poly.phi_partials(i);
                for (s, k) in [(i + n - 1) % n, i, (i + 1) % n].into_iter().enumerate() {
                    let fd = |f: &dyn Fn(&mut PolygonConfig, f64)| {
                        let (mut a, mut b) = (poly.clone(), poly.clone());
                        f(&mut a, h);
                        f(&mut b, -h);
                        (a.phi(i) - b.phi(i)) / (2.0 * h)
                    };
                    let da = fd(&|q: &mut PolygonConfig, e| q.alpha[k] += e);
                    let dp = fd(&|q: &mut PolygonConfig, e| q.p[k] += e);
                    assert!((da - d.d_alpha[s]).abs() < 1e-7, "n {n} i {i} k {k}: {da} vs {}", d.d_alpha[s]);
                    assert!((dp - d.d_p[s]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn regular_partials() {
        for n in 3..=8 {
            let poly = PolygonConfig::regular(n, 1.0, 0.0).unwrap();
            let t = PI / n as f64;
            let d = poly.phi_partials(2 % n);
            let da = 1.0 / (2.0 * t.cos().powi(2));
            let dp = 1.0 / (2.0 * (2.0 * t).sin());
            assert!((d.d_alpha[0] - da).abs() < 1e-12 && (d.d_alpha[2] - da).abs() < 1e-12);
            assert!((d.d_p[2] - dp).abs() < 1e-12 && (d.d_p[0] + dp).abs() < 1e-12);
            assert!(d.d_p[1].abs() < 1e-12);
            let b = poly.xi_bracket(0, 1);
            assert!((b.d_p[1] - da).abs() < 1e-12);
            assert!((b.d_p[0] + da).abs() < 1e-12);
        }
    }

    #[test]
    fn brackets_match_flows() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 3..=6 {
            let poly = random_polygon(&mut rng, n);
            for i in 0..n {
                for j in 0..n {
                    let closed = poly.xi_bracket(i, j);
                    let flow = poly.xi_bracket_flow(i, j, FLOW_STEP);
                    assert!(closed.max_diff(&flow) < 1e-5, "n {n} ({i},{j}): {}", closed.max_diff(&flow));
                    let apart = (i + n - j) % n;
                    if apart >= 2 && apart <= n - 2 {
                        assert_eq!(closed.max_abs(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn growth_near_regular() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 3..=8 {
            let mut poly = PolygonConfig::regular(n, 1.0, 0.2).unwrap();
            let g = poly.growth_report();
            assert_eq!(g.rank, 2 * n - 1);
            assert_eq!(g.pairing_rank, n - 1);
            assert!(g.level_defect < 1e-12);
            for k in 0..n {
                poly.alpha[k] += rng.random_range(-0.02..0.02);
                poly.p[k] += rng.random_range(-0.02..0.02);
            }
            assert_eq!(poly.growth_report().rank, 2 * n - 1);
        }
        for _ in 0..20 {
            assert_eq!(random_polygon(&mut rng, 3).growth_report().rank, 5);
        }
    }

    #[test]
    fn perimeter_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in 3..=8 {
            for _ in 0..10 {
                let poly = random_polygon(&mut rng, n);
                for i in 0..n {
                    assert!(poly.perimeter_derivative_along_xi(i).abs() < 1e-10);
                    assert!(poly.perimeter_derivative_by_flow(i, 1e-5).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn parallelogram_square_and_contact() {
        let sq = ParallelogramState {
            alpha1: 0.0,
            alpha2: FRAC_PI_2,
            p1: 0.5,
            p2: 0.5,
        };
        let f = parallelogram_fields(&sq).unwrap();
        assert!(f.xi1[2].abs() < 1e-15 && f.xi2[3].abs() < 1e-15);
        assert_eq!(f.bracket[2], -1.0);
        assert_eq!(f.bracket[3], 1.0);
        let w = PI / 3.0;
        let s = ParallelogramState {
            alpha1: 0.4,
            alpha2: 0.4 + w,
            p1: 0.3,
            p2: w.sin() - 0.3,
        };
        let f = parallelogram_fields(&s).unwrap();
        assert!((f.bracket[2].hypot(f.bracket[3]) / 2f64.sqrt() - w.sin()).abs() < 1e-15);
        for v in [f.xi1, f.xi2] {
            assert!(f.lambda_on(&v).abs() < 1e-12 && f.d_f_on(&v).abs() < 1e-12);
        }
        // lambda does not vanish on the bracket
        assert!(f.lambda_on(&f.bracket).abs() > 0.5);
        let off = ParallelogramState { p1: 0.5, ..s };
        assert!(matches!(parallelogram_fields(&off), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn parallelogram_is_the_symmetric_four_gon() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let w = rng.random_range(0.2..PI - 0.2);
            let p1 = rng.random_range(0.1..0.9) * w.sin();
            let s = ParallelogramState {
                alpha1: rng.random_range(0.0..TAU),
                alpha2: 0.0,
                p1,
                p2: w.sin() - p1,
            };
            let s = ParallelogramState { alpha2: s.alpha1 + w, ..s };
            let poly = PolygonConfig::from_parallelogram(&s).unwrap();
            let f = parallelogram_fields(&s).unwrap();
            assert!((poly.perimeter() - 4.0).abs() < 1e-12);
            for i in 0..4 {
                let want = if i % 2 == 0 { f.xi1[2] } else { f.xi2[3] };
                assert!((poly.phi(i) - want).abs() < 1e-11);
            }
            // xi_0 + xi_2 and xi_1 + xi_3 act on the symmetric 4-gons
            let mut b = TangentVectorField::zero(4);
            for (i, j) in [(0, 1), (0, 3), (2, 1), (2, 3)] {
                let c = poly.xi_bracket(i, j);
                for k in 0..4 {
                    b.d_p[k] += c.d_p[k];
                }
            }
            assert!((b.d_p[0] - f.bracket[2]).abs() < 1e-11 && (b.d_p[2] - f.bracket[2]).abs() < 1e-11);
            assert!((b.d_p[1] - f.bracket[3]).abs() < 1e-11 && (b.d_p[3] - f.bracket[3]).abs() < 1e-11);
        }
    }

    #[test]
    fn triangle_tables() {
        let t = PI / 3.0;
        let e = triangle_wu(t, t, t).unwrap();
        for k in 0..3 {
            assert!((e.w[k] - 2.0).abs() < 1e-12 && (e.u[k] - 2.0).abs() < 1e-12);
        }
        assert!((e.a + 1.0).abs() < 1e-12 && (e.b + 1.0).abs() < 1e-12);
        assert!(triangle_wu(1.0, 1.0, 1.0).is_err());
        assert!(triangle_wu(1.7, 0.7, PI - 2.4).is_err());
    }

    #[test]
    fn triangle_tables_against_brackets() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let (u, v) = loop {
                let u: f64 = rng.random_range(0.05..FRAC_PI_2);
                let v: f64 = rng.random_range(0.05..FRAC_PI_2);
                if u + v > FRAC_PI_2 + 0.05 {
                    break (u, v);
                }
            };
            let w = PI - u - v;
            let poly = PolygonConfig::new(vec![0.0, 2.0 * u, 2.0 * u + 2.0 * v], vec![1.0; 3]).unwrap();
            let t = triangle_wu(u, v, w).unwrap();
            for i in 0..3 {
                let j = (i + 1) % 3;
                let b = poly.xi_bracket(i, j);
                assert!((b.d_p[j] - t.bracket_w[j]).abs() < 1e-9 * t.bracket_w[j].max(1.0));
                assert!((-b.d_p[i] - t.bracket_u[i]).abs() < 1e-9 * t.bracket_u[i].max(1.0));
            }
            let tab = obstruction_by_differences(
                &|u, v, _| -v.tan() / u.tan(),
                &|u, _, w| -w.tan() / u.tan(),
                [u, v, w],
                1e-6,
            );
            assert!((tab - t.expression).abs() < 1e-5 * t.expression.abs().max(1.0));
            let br = obstruction_by_differences(
                &|u, v, _| -u.tan() / v.tan(),
                &|u, _, w| -u.tan() / w.tan(),
                [u, v, w],
                1e-6,
            );
            assert!((br - t.bracket_expression).abs() < 1e-5 * t.bracket_expression.abs().max(1.0));
            assert!(t.expression < 0.0 && t.bracket_expression > 0.0);
        }
    }

    #[test]
    fn json_uses_greek_key() {
        let poly = PolygonConfig::regular(4, 1.0, 0.0).unwrap();
        let s = poly.to_json();
        assert!(s.contains("\"α\""));
        assert_eq!(PolygonConfig::from_json(&s).unwrap(), poly);
        let alt = PolygonConfig::from_json(r#"{"alpha":[0,2,4],"p":[1,1,1]}"#).unwrap();
        assert_eq!(alt.n(), 3);
    }
}
