//! The outer length billiard map.
//!
//! A state is a pair of consecutive tangent lines `(a1, a2)`. The map sends it
//! to `(a2, a3)` where `a3` solves `R2(a1, a2) = R1(a2, a3)`. In phase
//! coordinates `(alpha, R) = (a1, R1(a1, a2))` the map preserves `dR ^ dalpha`.

use crate::error::{Error, Result};
use crate::genfun::{raw_hessian, raw_radii, ChordConfig, Hessian, MIN_GAP};
use crate::geom::{support_lines_meet, wrap_angle, PlanePoint};
use crate::oval::SupportOval;
use crate::roots;
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::Write;

pub type LinePairState = ChordConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub alpha: f64,
    pub r: f64,
}

const SCAN_NODES: usize = 64;

/// Solve `R1(a, b) = target` for `b` in `(a + MIN_GAP, a + pi - MIN_GAP)`.
fn solve_r1(oval: &SupportOval, a: f64, target: f64) -> Option<f64> {
    let f = |b: f64| raw_radii(oval, a, b).0 - target;
    let df = |b: f64| -raw_hessian(oval, a, b).s12;
    let (lo, hi) = roots::scan_bracket(f, a + MIN_GAP, a + PI - MIN_GAP, SCAN_NODES)?;
    Some(roots::bisect_newton(f, df, lo, hi, 1e-12, 2))
}

/// One application of the map.
pub fn step(oval: &SupportOval, state: &LinePairState) -> Result<LinePairState> {
    state.check()?;
    let (_, target) = raw_radii(oval, state.alpha1, state.alpha2);
    let fail = |reason: String| Error::StepFailure {
        alpha1: state.alpha1,
        alpha2: state.alpha2,
        reason,
    };
    if !(target > 0.0) {
        return Err(fail(format!("non-positive radius {target}")));
    }
    let a3 = solve_r1(oval, state.alpha2, target).ok_or_else(|| fail("no root in the gap interval".into()))?;
    let residual = raw_radii(oval, state.alpha2, a3).0 - target;
    if residual.abs() > 1e-11 * target.max(1.0) {
        return Err(fail(format!("residual {residual:e}")));
    }
    Ok(ChordConfig {
        alpha1: state.alpha2,
        alpha2: a3,
    })
}

/// Intersection point of the two tangent lines of a state.
pub fn corner(oval: &SupportOval, state: &LinePairState) -> PlanePoint {
    support_lines_meet(state.alpha1, oval.p(state.alpha1), state.alpha2, oval.p(state.alpha2))
        .unwrap_or(PlanePoint::new(f64::NAN, f64::NAN))
}

pub fn state_from_point(oval: &SupportOval, m: PlanePoint) -> Result<LinePairState> {
    let (a1, a2) = oval.tangent_angles_from(m)?;
    ChordConfig::new(a1, a2)
}

pub fn to_phase(oval: &SupportOval, state: &LinePairState) -> Result<PhasePoint> {
    state.check()?;
    Ok(PhasePoint {
        alpha: state.alpha1,
        r: raw_radii(oval, state.alpha1, state.alpha2).0,
    })
}

pub fn from_phase(oval: &SupportOval, pt: &PhasePoint) -> Result<LinePairState> {
    if !(pt.r > 0.0) || !pt.alpha.is_finite() {
        return Err(Error::StepFailure {
            alpha1: pt.alpha,
            alpha2: f64::NAN,
            reason: format!("phase radius {} must be positive", pt.r),
        });
    }
    let b = solve_r1(oval, pt.alpha, pt.r).ok_or_else(|| Error::StepFailure {
        alpha1: pt.alpha,
        alpha2: f64::NAN,
        reason: format!("radius {} out of range", pt.r),
    })?;
    ChordConfig::new(pt.alpha, b)
}

/// The map in phase coordinates: `(a1, R1) -> (a2, R2)`.
pub fn phase_map(oval: &SupportOval, pt: &PhasePoint) -> Result<PhasePoint> {
    let s = from_phase(oval, pt)?;
    Ok(PhasePoint {
        alpha: s.alpha2,
        r: raw_radii(oval, s.alpha1, s.alpha2).1,
    })
}

/// Differential of the map in `(R, alpha)` coordinates, rows `(R', alpha')`.
pub fn jacobian(oval: &SupportOval, state: &LinePairState) -> Result<Matrix2<f64>> {
    state.check()?;
    Ok(jacobian_from_hessian(&raw_hessian(oval, state.alpha1, state.alpha2)))
}

pub fn jacobian_from_hessian(h: &Hessian) -> Matrix2<f64> {
    Matrix2::new(
        -h.s22 / h.s12,
        (h.s12 * h.s12 - h.s11 * h.s22) / h.s12,
        -1.0 / h.s12,
        -h.s11 / h.s12,
    )
}

/// Central-difference differential of `phase_map`, same layout as [`jacobian`].
pub fn fd_jacobian(oval: &SupportOval, state: &LinePairState, h: f64) -> Result<Matrix2<f64>> {
    let z = to_phase(oval, state)?;
    let eval = |dr: f64, da: f64| {
        phase_map(
            oval,
            &PhasePoint {
                alpha: z.alpha + da,
                r: z.r + dr,
            },
        )
    };
    let (rp, rm) = (eval(h, 0.0)?, eval(-h, 0.0)?);
    let (ap, am) = (eval(0.0, h)?, eval(0.0, -h)?);
    let d = 2.0 * h;
    Ok(Matrix2::new(
        (rp.r - rm.r) / d,
        (ap.r - am.r) / d,
        (rp.alpha - rm.alpha) / d,
        (ap.alpha - am.alpha) / d,
    ))
}

/// `|det DT - 1|` for the numerically differentiated map.
pub fn symplectic_defect(oval: &SupportOval, state: &LinePairState) -> Result<f64> {
    let scale = to_phase(oval, state)?.r.max(1.0);
    Ok((fd_jacobian(oval, state, 1e-5 * scale)?.determinant() - 1.0).abs())
}

/// `d alpha'' / d R` for the square of the map.
pub fn twist_t2(oval: &SupportOval, state: &LinePairState) -> Result<f64> {
    let next = step(oval, state)?;
    let a = jacobian(oval, state)?;
    let b = jacobian(oval, &next)?;
    Ok((b * a)[(1, 0)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistReport {
    pub samples: usize,
    pub min_twist: f64,
    pub min_twist_squared: f64,
    pub max_symplectic_defect: f64,
    pub violations: usize,
    pub failures: Vec<String>,
}

impl TwistReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.failures.is_empty()
    }
}

/// Deterministic low-discrepancy states: base angle over the circle and gap in
/// `[gap_margin, pi - gap_margin]`.
pub fn sample_states(samples: usize, gap_margin: f64) -> Vec<LinePairState> {
    const G1: f64 = 0.754_877_666_246_692_7;
    const G2: f64 = 0.569_840_290_998_053_3;
    (0..samples)
        .map(|k| {
            let u = (0.5 + G1 * k as f64).fract();
            let v = (0.5 + G2 * k as f64).fract();
            let a = TAU * u;
            ChordConfig {
                alpha1: a,
                alpha2: a + gap_margin + (PI - 2.0 * gap_margin) * v,
            }
        })
        .collect()
}

pub fn twist_report(oval: &SupportOval, samples: usize) -> TwistReport {
    use rayon::prelude::*;
    let states = sample_states(samples, 0.05);
    let rows: Vec<Result<(f64, f64, f64)>> = states
        .par_iter()
        .map(|s| {
            let t1 = jacobian(oval, s)?[(1, 0)];
            let t2 = twist_t2(oval, s)?;
            let d = symplectic_defect(oval, s)?;
            Ok((t1, t2, d))
        })
        .collect();
    let mut rep = TwistReport {
        samples,
        min_twist: f64::INFINITY,
        min_twist_squared: f64::INFINITY,
        max_symplectic_defect: 0.0,
        violations: 0,
        failures: Vec::new(),
    };
    for (s, row) in states.iter().zip(rows) {
        match row {
            Ok((t1, t2, d)) => {
                rep.min_twist = rep.min_twist.min(t1);
                rep.min_twist_squared = rep.min_twist_squared.min(t2);
                rep.max_symplectic_defect = rep.max_symplectic_defect.max(d);
                if !(t1 > 0.0 && t2 > 0.0 && d < 1e-6) {
                    rep.violations += 1;
                }
            }
            Err(e) => {
                rep.violations += 1;
                rep.failures.push(format!("({}, {}): {e}", s.alpha1, s.alpha2));
            }
        }
    }
    rep
}

/// Geometric construction of the map from an exterior point.
///
/// The auxiliary circle touches the boundary at the second tangency point from
/// outside and the first tangent line on the side of the oval. The image point
/// is where the second tangent line meets the other tangent line common to the
/// oval and the circle with both on the same side.
pub fn cartesian_step(oval: &SupportOval, m: PlanePoint) -> Result<PlanePoint> {
    let (a1, a2) = oval.tangent_angles_from(m)?;
    let g2 = oval.point_at(a2);
    let l2 = m.dist(g2);
    let w = a2 - a1;
    let r = l2 * (0.5 * w).tan();
    let c = g2 + r * PlanePoint::unit(a2);
    let g = |a: f64| c.dot(PlanePoint::unit(a)) - oval.p(a) + r;
    let dg = |a: f64| c.dot(PlanePoint::unit(a + PI / 2.0)) - oval.dp(a);
    let fail = |reason: &str| Error::TangencyRoot(format!("{reason} from ({}, {})", m.x, m.y));
    let (lo, hi) = roots::scan_bracket(g, a2, a2 + PI, 4 * SCAN_NODES).ok_or_else(|| fail("no common tangent"))?;
    let a3 = roots::bisect_newton(g, dg, lo, hi, 1e-13, 2);
    support_lines_meet(a2, oval.p(a2), a3, oval.p(a3)).ok_or_else(|| fail("parallel tangent lines"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub step: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub r: f64,
    pub mx: f64,
    pub my: f64,
}

/// `n` iterations; row 0 is the initial state.
pub fn orbit(oval: &SupportOval, state: &LinePairState, n: usize) -> Result<Vec<OrbitRow>> {
    state.check()?;
    let mut rows = Vec::with_capacity(n + 1);
    let mut s = *state;
    for k in 0..=n {
        if k > 0 {
            s = step(oval, &s).map_err(|e| Error::OrbitStep {
                index: k,
                source: Box::new(e),
            })?;
        }
        let m = corner(oval, &s);
        rows.push(OrbitRow {
            step: k,
            alpha1: s.alpha1,
            alpha2: s.alpha2,
            r: raw_radii(oval, s.alpha1, s.alpha2).0,
            mx: m.x,
            my: m.y,
        });
    }
    Ok(rows)
}

/// Angular distance between the last and first states, modulo `2 pi`.
pub fn closure_residual(rows: &[OrbitRow]) -> f64 {
    let (Some(a), Some(b)) = (rows.first(), rows.last()) else {
        return f64::NAN;
    };
    angle_gap(a.alpha1, b.alpha1).max(angle_gap(a.alpha2, b.alpha2))
}

/// Distance between two angles on the circle.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

pub fn write_orbit_csv<W: Write>(rows: &[OrbitRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "step,alpha1,alpha2,R,M_x,M_y")?;
    for r in rows {
        writeln!(w, "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", r.step, r.alpha1, r.alpha2, r.r, r.mx, r.my)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn circle_steps_rotate() {
        let c = SupportOval::circle(1.0);
        let s = step(&c, &ChordConfig::new(0.0, FRAC_PI_2).unwrap()).unwrap();
        assert!((s.alpha1 - FRAC_PI_2).abs() < 1e-15);
        assert!((s.alpha2 - PI).abs() < 1e-12);
        let w = 2.0 * PI / 3.0;
        let s = step(&c, &ChordConfig::new(0.0, w).unwrap()).unwrap();
        assert!((s.alpha2 - 2.0 * w).abs() < 1e-12);
    }

    #[test]
    fn closed_form_differential_is_area_preserving() {
        let o = SupportOval::fourier(1.0, vec![0.0, 0.05, 0.03], vec![]).unwrap();
        for s in sample_states(50, 0.1) {
            let j = jacobian(&o, &s).unwrap();
            assert!((j.determinant() - 1.0).abs() < 1e-12);
        }
        let j = jacobian(&SupportOval::circle(1.0), &ChordConfig::new(0.0, FRAC_PI_2).unwrap()).unwrap();
        assert!((j[(1, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn phase_round_trip() {
        let o = SupportOval::fourier(1.0, vec![0.0, 0.0, 0.05], vec![]).unwrap();
        for s in sample_states(30, 0.1) {
            let z = to_phase(&o, &s).unwrap();
            let back = from_phase(&o, &z).unwrap();
            assert!((back.alpha2 - s.alpha2).abs() < 1e-11);
        }
    }

    #[test]
    fn unit_circle_point_map() {
        let c = SupportOval::circle(1.0);
        let m2 = cartesian_step(&c, PlanePoint::new(2f64.sqrt(), 0.0)).unwrap();
        assert!(m2.dist(PlanePoint::new(0.0, 2f64.sqrt())) < 1e-12, "{m2:?}");
        let m2 = cartesian_step(&c, PlanePoint::new(2.0, 0.0)).unwrap();
        assert!(m2.dist(PlanePoint::new(2.0, 0.0).rotate(2.0 * PI / 3.0)) < 1e-12);
    }

    #[test]
    fn orbit_reports_failing_index() {
        let c = SupportOval::circle(1.0);
        let rows = orbit(&c, &ChordConfig::new(0.0, FRAC_PI_2).unwrap(), 4).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(closure_residual(&rows) < 1e-12);
        let mut buf = Vec::new();
        write_orbit_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,alpha1,alpha2,R,M_x,M_y\n"));
        assert_eq!(text.lines().count(), 6);
    }
}
