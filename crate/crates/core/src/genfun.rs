//! The two-point generating function of the outer length billiard.
//!
//! For consecutive tangent lines with normal angles `a1 < a2`, `a2 - a1 < pi`,
//! `S(a1, a2) = l1 + l2 - arc`, where `l1`, `l2` are the tangent segments from
//! the intersection point of the lines to the tangency points and `arc` is the
//! boundary arc between them.

use crate::error::{Error, Result};
use crate::oval::SupportOval;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smallest admissible gap `a2 - a1`; the largest is `pi - MIN_GAP`.
pub const MIN_GAP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordConfig {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl ChordConfig {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        let c = Self { alpha1, alpha2 };
        c.check()?;
        Ok(c)
    }

    pub fn omega(&self) -> f64 {
        self.alpha2 - self.alpha1
    }

    pub fn check(&self) -> Result<()> {
        let w = self.omega();
        if (MIN_GAP..=PI - MIN_GAP).contains(&w) {
            Ok(())
        } else {
            Err(Error::GapDomain {
                omega: w,
                lo: MIN_GAP,
                hi: PI - MIN_GAP,
            })
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            alpha1: self.alpha1 + c,
            alpha2: self.alpha2 + c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hessian {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepData {
    pub l1: f64,
    pub l2: f64,
    pub s: f64,
    pub r1: f64,
    pub r2: f64,
    pub hessian: Option<Hessian>,
}

/// Unchecked kernel shared by the public entry points and the root solvers.
#[inline]
pub(crate) fn raw_tangent_lengths(oval: &SupportOval, a1: f64, a2: f64) -> (f64, f64) {
    let w = a2 - a1;
    let (j1, j2) = (oval.jet(a1), oval.jet(a2));
    let (sw, cw) = w.sin_cos();
    let cot = cw / sw;
    let l1 = -j1.dp + j2.p / sw - j1.p * cot;
    let l2 = j2.dp + j1.p / sw - j2.p * cot;
    (l1, l2)
}

#[inline]
pub(crate) fn raw_radii(oval: &SupportOval, a1: f64, a2: f64) -> (f64, f64) {
    let (l1, l2) = raw_tangent_lengths(oval, a1, a2);
    let t = (0.5 * (a2 - a1)).tan();
    (l1 * t, l2 * t)
}

#[inline]
pub(crate) fn raw_hessian(oval: &SupportOval, a1: f64, a2: f64) -> Hessian {
    let w = a2 - a1;
    let (r1, r2) = raw_radii(oval, a1, a2);
    let t = (0.5 * w).tan();
    Hessian {
        s11: t * (r1 + oval.curvature_radius(a1)),
        s12: -(r1 + r2) / w.sin(),
        s22: t * (r2 + oval.curvature_radius(a2)),
    }
}

pub fn tangent_lengths(oval: &SupportOval, cfg: &ChordConfig) -> Result<(f64, f64)> {
    cfg.check()?;
    Ok(raw_tangent_lengths(oval, cfg.alpha1, cfg.alpha2))
}

pub fn generating_s(oval: &SupportOval, cfg: &ChordConfig) -> Result<f64> {
    cfg.check()?;
    Ok(raw_s(oval, cfg.alpha1, cfg.alpha2))
}

#[inline]
pub(crate) fn raw_s(oval: &SupportOval, a1: f64, a2: f64) -> f64 {
    (oval.p(a1) + oval.p(a2)) * (0.5 * (a2 - a1)).tan() - oval.integral(a1, a2)
}

/// `(S_1, S_2) = (-R_1, R_2)`.
pub fn grad_s(oval: &SupportOval, cfg: &ChordConfig) -> Result<(f64, f64)> {
    let (r1, r2) = radii(oval, cfg)?;
    Ok((-r1, r2))
}

/// The partials written directly in terms of `p`, with the common factor
/// `1 / (2 cos^2(w/2))`.
pub fn grad_s_support_form(oval: &SupportOval, cfg: &ChordConfig) -> Result<(f64, f64)> {
    cfg.check()?;
    let w = cfg.omega();
    let (j1, j2) = (oval.jet(cfg.alpha1), oval.jet(cfg.alpha2));
    let (sw, cw) = w.sin_cos();
    let k = 1.0 / (2.0 * (0.5 * w).cos().powi(2));
    Ok((
        k * (j1.dp * sw + j1.p * cw - j2.p),
        k * (j2.dp * sw + j1.p - j2.p * cw),
    ))
}

/// Radii of the two auxiliary circles, `R_i = l_i tan(w/2)`.
pub fn radii(oval: &SupportOval, cfg: &ChordConfig) -> Result<(f64, f64)> {
    cfg.check()?;
    Ok(raw_radii(oval, cfg.alpha1, cfg.alpha2))
}

pub fn hess_s(oval: &SupportOval, cfg: &ChordConfig) -> Result<Hessian> {
    cfg.check()?;
    Ok(raw_hessian(oval, cfg.alpha1, cfg.alpha2))
}

pub fn step_data(oval: &SupportOval, cfg: &ChordConfig, with_hessian: bool) -> Result<StepData> {
    cfg.check()?;
    let (l1, l2) = raw_tangent_lengths(oval, cfg.alpha1, cfg.alpha2);
    let t = (0.5 * cfg.omega()).tan();
    Ok(StepData {
        l1,
        l2,
        s: raw_s(oval, cfg.alpha1, cfg.alpha2),
        r1: l1 * t,
        r2: l2 * t,
        hessian: with_hessian.then(|| raw_hessian(oval, cfg.alpha1, cfg.alpha2)),
    })
}

/// Central-difference gradient of `S`.
pub fn fd_grad_s(oval: &SupportOval, cfg: &ChordConfig, h: f64) -> (f64, f64) {
    let (a, b) = (cfg.alpha1, cfg.alpha2);
    let s = |x: f64, y: f64| raw_s(oval, x, y);
    (
        (s(a + h, b) - s(a - h, b)) / (2.0 * h),
        (s(a, b + h) - s(a, b - h)) / (2.0 * h),
    )
}

/// Central second differences of `S`.
pub fn fd_hess_s(oval: &SupportOval, cfg: &ChordConfig, h: f64) -> Hessian {
    let (a, b) = (cfg.alpha1, cfg.alpha2);
    let s = |x: f64, y: f64| raw_s(oval, x, y);
    let s0 = s(a, b);
    Hessian {
        s11: (s(a + h, b) - 2.0 * s0 + s(a - h, b)) / (h * h),
        s22: (s(a, b + h) - 2.0 * s0 + s(a, b - h)) / (h * h),
        s12: (s(a + h, b + h) - s(a + h, b - h) - s(a - h, b + h) + s(a - h, b - h)) / (4.0 * h * h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn circle_right_angle() {
        let c = SupportOval::circle(1.0);
        let cfg = ChordConfig::new(0.0, FRAC_PI_2).unwrap();
        let d = step_data(&c, &cfg, true).unwrap();
        assert!(close(d.l1, 1.0, 1e-15) && close(d.l2, 1.0, 1e-15));
        assert!(close(d.r1, 1.0, 1e-15) && close(d.r2, 1.0, 1e-15));
        assert!(close(d.s, 2.0 - FRAC_PI_2, 1e-15));
        let h = d.hessian.unwrap();
        assert!(close(h.s11, 2.0, 1e-14) && close(h.s22, 2.0, 1e-14) && close(h.s12, -2.0, 1e-14));
        let (g1, g2) = grad_s(&c, &cfg).unwrap();
        assert!(close(g1, -1.0, 1e-15) && close(g2, 1.0, 1e-15));
    }

    #[test]
    fn circle_two_thirds() {
        let c = SupportOval::circle(1.0);
        let cfg = ChordConfig::new(0.3, 0.3 + 2.0 * PI / 3.0).unwrap();
        let (l1, l2) = tangent_lengths(&c, &cfg).unwrap();
        let r3 = 3f64.sqrt();
        assert!(close(l1, r3, 1e-14) && close(l2, r3, 1e-14));
        let (r1, r2) = radii(&c, &cfg).unwrap();
        assert!(close(r1, 3.0, 1e-13) && close(r2, 3.0, 1e-13));
        let h = hess_s(&c, &cfg).unwrap();
        assert!(close(h.s11, 4.0 * r3, 1e-13));
        assert!(close(h.s22, 4.0 * r3, 1e-13));
        assert!(close(h.s12, -4.0 * r3, 1e-13));
    }

    #[test]
    fn small_gap_asymptotics() {
        let c = SupportOval::circle(1.0);
        for &w in &[1e-2, 3e-3, 1e-3] {
            let s = generating_s(&c, &ChordConfig::new(0.0, w).unwrap()).unwrap();
            assert!(((s / (w * w * w)) - 1.0 / 12.0).abs() < 1e-3, "{w}: {s}");
        }
    }

    #[test]
    fn ellipse_vertex_tangents() {
        let e = SupportOval::ellipse(2.0, 1.0).unwrap();
        let cfg = ChordConfig::new(0.0, FRAC_PI_2).unwrap();
        let (l1, l2) = tangent_lengths(&e, &cfg).unwrap();
        // tangent lines x = 2 and y = 1 meet at (2, 1)
        assert!(close(l1, 1.0, 1e-12), "{l1}");
        assert!(close(l2, 2.0, 1e-12), "{l2}");
    }

    #[test]
    fn domain_is_enforced() {
        assert!(matches!(ChordConfig::new(0.0, 0.0), Err(Error::GapDomain { .. })));
        assert!(ChordConfig::new(0.0, 5e-5).is_err());
        assert!(ChordConfig::new(0.0, PI).is_err());
        assert!(ChordConfig::new(1.0, 0.5).is_err());
        assert!(ChordConfig::new(0.0, PI - 2e-4).is_ok());
    }

    #[test]
    fn support_form_matches_radius_form() {
        let o = SupportOval::fourier(1.0, vec![0.0, 0.05, 0.03], vec![0.0, 0.0, 0.02]).unwrap();
        for k in 0..40 {
            let a = 0.17 * k as f64;
            let cfg = ChordConfig::new(a, a + 0.2 + 0.07 * k as f64).unwrap();
            let (g1, g2) = grad_s(&o, &cfg).unwrap();
            let (h1, h2) = grad_s_support_form(&o, &cfg).unwrap();
            assert!(close(g1, h1, 1e-10 * g1.abs().max(1.0)), "{k}");
            assert!(close(g2, h2, 1e-10 * g2.abs().max(1.0)), "{k}");
        }
    }
}
