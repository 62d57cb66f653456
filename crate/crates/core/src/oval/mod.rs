//! Smooth strictly convex ovals given by their support function.
//!
//! An oval is stored as `p(alpha)`, the signed distance from the origin to the
//! tangent line with outward normal `(cos alpha, sin alpha)`. Everything else
//! (boundary points, curvature radius, arc length, tangent lines through an
//! exterior point) is computed from `p`, `p'` and `p''`.

mod fourier;
mod hermite;

pub use fourier::FourierSeries;
pub use hermite::{spectral_derivatives, HermiteSamples};
pub(crate) use hermite::{eval_cell, quintic_cell};

use crate::error::{Error, Result};
use crate::geom::{wrap_angle, PlanePoint};
use crate::roots;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Size of the uniform grid used for validation and tangency scans.
pub const VALIDATION_GRID: usize = 2048;

/// Default number of samples for tables that are only known pointwise.
pub const DEFAULT_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub p: f64,
    pub dp: f64,
    pub ddp: f64,
}

impl Jet {
    /// `p'' + p`, the radius of curvature of the boundary.
    pub fn radius(&self) -> f64 {
        self.ddp + self.p
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Fourier(FourierSeries),
    Samples(HermiteSamples),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportOval {
    repr: Repr,
    symmetric: bool,
}

/// On-disk form of an oval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum OvalDescriptor {
    Fourier {
        a0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Samples {
        p: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dp: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ddp: Option<Vec<f64>>,
    },
}

fn check_finite(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidOval(format!("non-finite entries in {name}")))
    }
}

impl SupportOval {
    pub fn circle(r: f64) -> Self {
        Self::fourier(r, vec![], vec![]).expect("finite radius")
    }

    pub fn fourier(a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        check_finite("a0", &[a0])?;
        check_finite("cos", &cos)?;
        check_finite("sin", &sin)?;
        let series = FourierSeries { a0, cos, sin };
        let symmetric = series.centrally_symmetric();
        Ok(Self {
            repr: Repr::Fourier(series),
            symmetric,
        })
    }

    /// Uniform samples of `p` on `[0, 2pi)`; node derivatives are spectral.
    pub fn from_samples(p: Vec<f64>) -> Result<Self> {
        if p.len() < 8 {
            return Err(Error::InvalidOval("need at least 8 samples".into()));
        }
        check_finite("p", &p)?;
        Ok(Self::from_hermite_samples(HermiteSamples::from_values(p)))
    }

    /// Uniform samples of `p, p', p''` on `[0, 2pi)`.
    pub fn from_hermite(p: Vec<f64>, dp: Vec<f64>, ddp: Vec<f64>) -> Result<Self> {
        if p.len() < 8 || dp.len() != p.len() || ddp.len() != p.len() {
            return Err(Error::InvalidOval("sample arrays must share a length >= 8".into()));
        }
        check_finite("p", &p)?;
        check_finite("dp", &dp)?;
        check_finite("ddp", &ddp)?;
        Ok(Self::from_hermite_samples(HermiteSamples::new(p, dp, ddp)))
    }

    /// Sample an analytic support function `alpha -> [p, p', p'']` on `n` nodes.
    pub fn from_jet_fn(n: usize, f: impl Fn(f64) -> [f64; 3]) -> Result<Self> {
        let h = TAU / n as f64;
        let jets: Vec<[f64; 3]> = (0..n).map(|j| f(j as f64 * h)).collect();
        Self::from_hermite(
            jets.iter().map(|j| j[0]).collect(),
            jets.iter().map(|j| j[1]).collect(),
            jets.iter().map(|j| j[2]).collect(),
        )
    }

    /// Origin-centred ellipse with semi-axis `a` along x and `b` along y.
    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidOval("ellipse semi-axes must be positive".into()));
        }
        Self::from_jet_fn(DEFAULT_SAMPLES, |t| ellipse_support(a, b, t))
    }

    fn from_hermite_samples(s: HermiteSamples) -> Self {
        let symmetric = s.centrally_symmetric(1e-12);
        Self {
            repr: Repr::Samples(s),
            symmetric,
        }
    }

    pub fn from_descriptor(d: &OvalDescriptor) -> Result<Self> {
        match d {
            OvalDescriptor::Fourier { a0, cos, sin } => Self::fourier(*a0, cos.clone(), sin.clone()),
            OvalDescriptor::Samples { p, dp, ddp } => match (dp, ddp) {
                (Some(dp), Some(ddp)) => Self::from_hermite(p.clone(), dp.clone(), ddp.clone()),
                (None, None) => Self::from_samples(p.clone()),
                _ => Err(Error::InvalidOval("dp and ddp must be given together".into())),
            },
        }
    }

    pub fn descriptor(&self) -> OvalDescriptor {
        match &self.repr {
            Repr::Fourier(s) => OvalDescriptor::Fourier {
                a0: s.a0,
                cos: s.cos.clone(),
                sin: s.sin.clone(),
            },
            Repr::Samples(s) => OvalDescriptor::Samples {
                p: s.p.clone(),
                dp: Some(s.dp.clone()),
                ddp: Some(s.ddp.clone()),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.descriptor()).expect("descriptor serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: OvalDescriptor =
            serde_json::from_str(s).map_err(|e| Error::InvalidOval(format!("descriptor: {e}")))?;
        Self::from_descriptor(&d)
    }

    /// True when `p(alpha + pi) = p(alpha)`.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn jet(&self, a: f64) -> Jet {
        let [p, dp, ddp] = match &self.repr {
            Repr::Fourier(s) => s.jet(a),
            Repr::Samples(s) => s.jet(a),
        };
        Jet { p, dp, ddp }
    }

    pub fn p(&self, a: f64) -> f64 {
        self.jet(a).p
    }

    pub fn dp(&self, a: f64) -> f64 {
        self.jet(a).dp
    }

    /// `int_{a}^{b} p`, for any reals `a`, `b`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match &self.repr {
            Repr::Fourier(s) => s.primitive(b) - s.primitive(a),
            Repr::Samples(s) => s.primitive(b) - s.primitive(a),
        }
    }

    pub fn curvature_radius(&self, a: f64) -> f64 {
        self.jet(a).radius()
    }

    pub fn point_at(&self, a: f64) -> PlanePoint {
        let j = self.jet(a);
        let (s, c) = a.sin_cos();
        PlanePoint::new(j.p * c - j.dp * s, j.p * s + j.dp * c)
    }

    /// Length of the boundary arc between normal directions `a1 < a2 <= a1 + 2pi`.
    pub fn arc_length(&self, a1: f64, a2: f64) -> Result<f64> {
        if !(a1 < a2 && a2 <= a1 + TAU + 1e-12) {
            return Err(Error::ReversedInterval { from: a1, to: a2 });
        }
        Ok(self.dp(a2) - self.dp(a1) + self.integral(a1, a2))
    }

    pub fn perimeter(&self) -> f64 {
        self.integral(0.0, TAU)
    }

    /// Signed distance from the support line with normal angle `a` to `m`;
    /// positive when `m` is on the outer side.
    pub fn support_excess(&self, m: PlanePoint, a: f64) -> f64 {
        m.dot(PlanePoint::unit(a)) - self.p(a)
    }

    /// The two tangent lines through the exterior point `m`.
    ///
    /// Returns `(alpha1, alpha2)` with `alpha1` in `[0, 2pi)` and
    /// `0 < alpha2 - alpha1 < pi`. Walking counterclockwise around the oval,
    /// `alpha1` is the line where `m` enters the outer side of the support
    /// lines and `alpha2` where it leaves.
    pub fn tangent_angles_from(&self, m: PlanePoint) -> Result<(f64, f64)> {
        if !m.is_finite() {
            return Err(Error::Containment { x: m.x, y: m.y });
        }
        let n = VALIDATION_GRID;
        let h = TAU / n as f64;
        let g = |a: f64| self.support_excess(m, a);
        let dg = |a: f64| m.dot(PlanePoint::unit(a + PI / 2.0)) - self.dp(a);
        let vals: Vec<f64> = (0..n).map(|j| g(j as f64 * h)).collect();
        let mut rising = None;
        let mut falling = None;
        let mut count = 0;
        for j in 0..n {
            let (a, b) = (vals[j], vals[(j + 1) % n]);
            if a <= 0.0 && b > 0.0 {
                rising = Some(j);
                count += 1;
            } else if a > 0.0 && b <= 0.0 {
                falling = Some(j);
                count += 1;
            }
        }
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (r, f) = match (rising, falling) {
            (Some(r), Some(f)) if count == 2 => (r, f),
            _ if max <= 0.0 => return Err(Error::Containment { x: m.x, y: m.y }),
            _ => {
                return Err(Error::TangencyRoot(format!(
                    "expected two tangent lines from ({}, {}), found {count} sign changes",
                    m.x, m.y
                )))
            }
        };
        let refine = |j: usize| {
            let a = j as f64 * h;
            roots::bisect_newton(g, dg, a, a + h, 1e-13, 3)
        };
        let a1 = wrap_angle(refine(r));
        let mut a2 = refine(f);
        while a2 <= a1 {
            a2 += TAU;
        }
        while a2 > a1 + TAU {
            a2 -= TAU;
        }
        if a2 - a1 >= PI {
            return Err(Error::TangencyRoot(format!("tangent gap {} >= pi", a2 - a1)));
        }
        Ok((a1, a2))
    }

    pub fn validate(&self) -> ValidationReport {
        ValidationReport::compute(self)
    }

    /// Convenience: the oval itself if it passes validation.
    pub fn validated(self) -> Result<Self> {
        let r = self.validate();
        if r.passed {
            Ok(self)
        } else {
            Err(Error::InvalidOval(r.failures.join("; ")))
        }
    }
}

/// `[h, h', h'']` for the ellipse support `h = sqrt(a^2 cos^2 t + b^2 sin^2 t)`.
pub fn ellipse_support(a: f64, b: f64, t: f64) -> [f64; 3] {
    let (s, c) = t.sin_cos();
    let h = (a * a * c * c + b * b * s * s).sqrt();
    let k = b * b - a * a;
    let dh = k * s * c / h;
    let ddh = k * ((2.0 * t).cos() - s * c * dh / h) / h;
    [h, dh, ddh]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub min_p: f64,
    pub min_p_at: f64,
    pub min_radius: f64,
    pub min_radius_at: f64,
    pub max_periodicity_defect: f64,
    /// `max |p(alpha + pi) - p(alpha)|` when the oval claims central symmetry.
    pub symmetry_defect: Option<f64>,
    pub passed: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    fn compute(oval: &SupportOval) -> Self {
        let n = VALIDATION_GRID;
        let h = TAU / n as f64;
        let mut min_p = (f64::INFINITY, 0.0);
        let mut min_r = (f64::INFINITY, 0.0);
        let mut periodicity: f64 = 0.0;
        let mut symmetry: f64 = 0.0;
        for j in 0..n {
            let a = j as f64 * h;
            let jet = oval.jet(a);
            if jet.p < min_p.0 {
                min_p = (jet.p, a);
            }
            if jet.radius() < min_r.0 {
                min_r = (jet.radius(), a);
            }
            for shift in [TAU, -TAU] {
                let o = oval.jet(a + shift);
                periodicity = periodicity
                    .max((o.p - jet.p).abs())
                    .max((o.dp - jet.dp).abs())
                    .max((o.ddp - jet.ddp).abs());
            }
            if oval.symmetric {
                symmetry = symmetry.max((oval.p(a + PI) - jet.p).abs());
            }
        }
        let min_p = refine_min(|a| oval.p(a), min_p, h);
        let min_r = refine_min(|a| oval.curvature_radius(a), min_r, h);
        let mut failures = Vec::new();
        if !(min_p.0 > 0.0) {
            failures.push(format!("support function not positive: p({:.6}) = {:.6e}", min_p.1, min_p.0));
        }
        if !(min_r.0 > 0.0) {
            failures.push(format!(
                "not strictly convex: p''+p at {:.6} = {:.6e}",
                min_r.1, min_r.0
            ));
        }
        if !(periodicity <= 1e-9) {
            failures.push(format!("periodicity defect {periodicity:e}"));
        }
        if oval.symmetric && !(symmetry <= 1e-9) {
            failures.push(format!("central symmetry defect {symmetry:e}"));
        }
        Self {
            min_p: min_p.0,
            min_p_at: min_p.1,
            min_radius: min_r.0,
            min_radius_at: min_r.1,
            max_periodicity_defect: periodicity,
            symmetry_defect: oval.symmetric.then_some(symmetry),
            passed: failures.is_empty(),
            failures,
        }
    }
}

/// Three rounds of local resampling around a grid minimum.
fn refine_min(f: impl Fn(f64) -> f64, start: (f64, f64), h: f64) -> (f64, f64) {
    let (mut best, mut at) = start;
    let mut width = h;
    for _ in 0..3 {
        let centre = at;
        for k in -16..=16 {
            let a = centre + width * k as f64 / 16.0;
            let v = f(a);
            if v < best {
                best = v;
                at = wrap_angle(a);
            }
        }
        width /= 8.0;
    }
    (best, at)
}
