//! Completion of a quarter support function to a centrally symmetric table
//! whose 4-periodic orbits fill an invariant curve.
//!
//! The arc `p` on `[0, pi/2]` must satisfy `p'(0) = p'(pi/2) = 0` and
//! `p(0) + p(pi/2) = 1`. Each normal angle `a` of the arc is paired with
//! `b = a + arccos(-p'(a))` in `[pi/2, pi]` and `p(b) = -p(a) + sin(b - a)`.
//! The lower half plane follows by central symmetry.

use crate::error::{Error, Result};
use crate::oval::{eval_cell, quintic_cell, SupportOval};
use crate::roots;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

/// Largest correction the endpoint projection may apply before the input is
/// rejected.
pub const MAX_PROJECTION: f64 = 1e-3;
pub const SEAM_TOL: f64 = 1e-8;
const STENCIL: usize = 9;

#[derive(Clone)]
pub enum ArcInput {
    /// `p` at `M + 1` equally spaced angles covering `[0, pi/2]`.
    Samples(Vec<f64>),
    /// `a -> [p, p', p'']` on `[0, pi/2]`.
    Jet(Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>),
}

impl fmt::Debug for ArcInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Samples(p) => write!(f, "Samples({} values)", p.len()),
            Self::Jet(_) => f.write_str("Jet"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RadonTable {
    pub oval: SupportOval,
    /// Size of the correction applied to meet the endpoint constraints.
    pub projection_defect: f64,
    /// Largest jump of `p` or `p'` across the quadrant seams.
    pub seam_defect: f64,
    /// Largest jump of `p''` across the seams (averaged in the table).
    pub curvature_jump: f64,
}

/// Finite-difference weights at `z` for nodes `x`, derivative orders
/// `0..=m`; `w[k][j]` multiplies `f(x[j])` in the `k`-th derivative.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Quintic Hermite interpolant of sampled arc data with finite-difference
/// node derivatives.
struct SampledArc {
    h: f64,
    cells: Vec<[f64; 6]>,
}

impl SampledArc {
    fn new(p: &[f64]) -> Result<Self> {
        let n = p.len();
        if n < STENCIL {
            return Err(Error::ArcConstraint(format!("need at least {STENCIL} arc samples, got {n}")));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::ArcConstraint("non-finite arc sample".into()));
        }
        let h = FRAC_PI_2 / (n - 1) as f64;
        let jets: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let start = i.saturating_sub(STENCIL / 2).min(n - STENCIL);
                let xs: Vec<f64> = (start..start + STENCIL).map(|k| (k as f64 - i as f64) * h).collect();
                let w = fornberg_weights(0.0, &xs, 2);
                let d = |k: usize| (0..STENCIL).map(|j| w[k][j] * p[start + j]).sum::<f64>();
                [p[i], d(1), d(2)]
            })
            .collect();
        let cells = (0..n - 1).map(|j| quintic_cell(jets[j], jets[j + 1], h)).collect();
        Ok(Self { h, cells })
    }

    fn jet(&self, a: f64) -> [f64; 3] {
        let u = a / self.h;
        let j = (u.floor().max(0.0) as usize).min(self.cells.len() - 1);
        eval_cell(&self.cells[j], (u - j as f64).clamp(0.0, 1.0), self.h)
    }
}

pub fn radon_like(arc: &ArcInput) -> Result<RadonTable> {
    radon_like_with(arc, crate::oval::DEFAULT_SAMPLES)
}

pub fn radon_like_with(arc: &ArcInput, samples: usize) -> Result<RadonTable> {
    if samples < 16 || !samples.is_multiple_of(4) {
        return Err(Error::InvalidOval(format!("sample count {samples} must be a multiple of 4, >= 16")));
    }
    let sampled;
    let raw: &dyn Fn(f64) -> [f64; 3] = match arc {
        ArcInput::Samples(p) => {
            sampled = SampledArc::new(p)?;
            &|a| sampled.jet(a)
        }
        ArcInput::Jet(f) => f.as_ref(),
    };

    // constant + c1 sin(2a)/2 + c2 sin(4a)/4 restores the endpoint constraints
    let (j0, j1) = (raw(0.0), raw(FRAC_PI_2));
    let c0 = 0.5 * (1.0 - j0[0] - j1[0]);
    let c1 = -0.5 * (j0[1] - j1[1]);
    let c2 = -0.5 * (j0[1] + j1[1]);
    let projection_defect = c0.abs().max(c1.abs()).max(c2.abs());
    if !projection_defect.is_finite() || projection_defect > MAX_PROJECTION {
        return Err(Error::ArcConstraint(format!(
            "endpoint constraints violated by {projection_defect:e}: p(0) + p(pi/2) = {}, p'(0) = {}, p'(pi/2) = {}",
            j0[0] + j1[0],
            j0[1],
            j1[1]
        )));
    }
    let jet = |a: f64| {
        let r = raw(a);
        let (s2, c2a) = (2.0 * a).sin_cos();
        let (s4, c4a) = (4.0 * a).sin_cos();
        [
            r[0] + c0 + 0.5 * c1 * s2 + 0.25 * c2 * s4,
            r[1] + c1 * c2a + c2 * c4a,
            r[2] - 2.0 * c1 * s2 - 4.0 * c2 * s4,
        ]
    };
    let beta = |a: f64| {
        let j = jet(a);
        let q = (1.0 - j[1] * j[1]).sqrt();
        (a + (-j[1]).clamp(-1.0, 1.0).acos(), 1.0 + j[2] / q)
    };

    let check = 4 * samples;
    for k in 0..=check {
        let a = FRAC_PI_2 * k as f64 / check as f64;
        let j = jet(a);
        if !(j[1].abs() < 1.0) {
            return Err(Error::ArcConstraint(format!("|p'({a})| = {} must stay below 1", j[1].abs())));
        }
        if !(j[0] + j[2] > 0.0) {
            return Err(Error::Convexity {
                alpha: a,
                radius: j[0] + j[2],
            });
        }
        let (_, db) = beta(a);
        if !(db > 0.0) {
            return Err(Error::NonMonotone { x: a, value: db });
        }
    }

    let extended = |a: f64| {
        let j = jet(a);
        let (b, db) = beta(a);
        [-j[0] + (b - a).sin(), -j[1], -j[2] / db]
    };
    let at_beta = |b: f64| {
        let a = roots::safe_newton(
            |a| {
                let (bb, db) = beta(a);
                (bb - b, db)
            },
            0.0,
            FRAC_PI_2,
            1e-15,
            200,
        );
        extended(a)
    };

    let (arc_top, ext_top) = (jet(FRAC_PI_2), extended(0.0));
    let (arc_base, ext_base) = (jet(0.0), extended(FRAC_PI_2));
    let seam_defect = [
        (arc_top[0] - ext_top[0]).abs(),
        (arc_top[1] - ext_top[1]).abs(),
        (arc_base[0] - ext_base[0]).abs(),
        (arc_base[1] - ext_base[1]).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let curvature_jump = (arc_top[2] - ext_top[2]).abs().max((arc_base[2] - ext_base[2]).abs());
    if !(seam_defect <= SEAM_TOL) {
        let alpha = if (arc_top[0] - ext_top[0]).abs().max((arc_top[1] - ext_top[1]).abs()) > SEAM_TOL {
            FRAC_PI_2
        } else {
            PI
        };
        return Err(Error::SeamDiscontinuity {
            alpha,
            defect: seam_defect,
        });
    }

    let quarter = samples / 4;
    let h = FRAC_PI_2 / quarter as f64;
    // upper half plane, nodes 0..2*quarter
    let half: Vec<[f64; 3]> = (0..2 * quarter)
        .map(|j| {
            if j == 0 {
                [arc_base[0], arc_base[1], 0.5 * (arc_base[2] + ext_base[2])]
            } else if j == quarter {
                [arc_top[0], arc_top[1], 0.5 * (arc_top[2] + ext_top[2])]
            } else if j < quarter {
                jet(j as f64 * h)
            } else {
                at_beta(j as f64 * h)
            }
        })
        .collect();
    let full: Vec<[f64; 3]> = half.iter().chain(half.iter()).copied().collect();
    let oval = SupportOval::from_hermite(
        full.iter().map(|j| j[0]).collect(),
        full.iter().map(|j| j[1]).collect(),
        full.iter().map(|j| j[2]).collect(),
    )?;
    let report = oval.validate();
    if !report.passed {
        return Err(Error::Convexity {
            alpha: report.min_radius_at,
            radius: report.min_radius,
        });
    }
    Ok(RadonTable {
        oval,
        projection_defect,
        seam_defect,
        curvature_jump,
    })
}
