use crate::error::{Error, Result};
use crate::geom::{support_lines_meet, PlanePoint};
use crate::oval::SupportOval;
use crate::roots;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::sync::Arc;

const CHECK_GRID: usize = 4096;

/// A profile `f` together with its first three derivatives.
pub trait Profile: Send + Sync {
    /// `[f, f', f'', f''']` at `x`.
    fn jet(&self, x: f64) -> [f64; 4];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: u32,
    #[serde(default)]
    pub sin: f64,
    #[serde(default)]
    pub cos: f64,
}

/// `f(x) = sum sin_k sin(kx) + cos_k cos(kx)` over harmonics `k = 2 mod 4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourPeriodicSpec {
    pub harmonics: Vec<Harmonic>,
}

impl FourPeriodicSpec {
    pub fn new(harmonics: Vec<Harmonic>) -> Result<Self> {
        let s = Self { harmonics };
        if s.harmonics.iter().any(|h| !h.sin.is_finite() || !h.cos.is_finite()) {
            return Err(Error::InvalidOval("non-finite harmonic coefficient".into()));
        }
        let odd: Vec<Harmonic> = s
            .harmonics
            .iter()
            .copied()
            .filter(|h| h.k % 4 != 2 && (h.sin != 0.0 || h.cos != 0.0))
            .collect();
        if !odd.is_empty() {
            let bad = Self { harmonics: odd };
            return Err(Error::Antiperiodicity {
                defect: antiperiodicity_defect(&bad),
            });
        }
        let f0 = s.jet(0.0)[0];
        if f0.abs() > 1e-12 {
            return Err(Error::NotNormalized { value: f0 });
        }
        Ok(s)
    }

    /// The single-harmonic profile `eps sin 2x`.
    pub fn sin2(eps: f64) -> Self {
        Self {
            harmonics: vec![Harmonic { k: 2, sin: eps, cos: 0.0 }],
        }
    }
}

impl Profile for FourPeriodicSpec {
    fn jet(&self, x: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for h in &self.harmonics {
            let k = h.k as f64;
            let (s, c) = (k * x).sin_cos();
            let v = h.sin * s + h.cos * c;
            let d = k * (h.sin * c - h.cos * s);
            out[0] += v;
            out[1] += d;
            out[2] -= k * k * v;
            out[3] -= k * k * d;
        }
        out
    }
}

/// A profile given by a closure returning `[f, f', f'', f''']`.
pub struct ClosureProfile {
    f: Box<dyn Fn(f64) -> [f64; 4] + Send + Sync>,
}

impl fmt::Debug for ClosureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ClosureProfile")
    }
}

impl ClosureProfile {
    pub fn new(f: impl Fn(f64) -> [f64; 4] + Send + Sync + 'static) -> Result<Self> {
        let p = Self { f: Box::new(f) };
        let defect = antiperiodicity_defect(&p);
        if defect > 1e-12 {
            return Err(Error::Antiperiodicity { defect });
        }
        let f0 = p.jet(0.0)[0];
        if f0.abs() > 1e-12 {
            return Err(Error::NotNormalized { value: f0 });
        }
        Ok(p)
    }
}

impl Profile for ClosureProfile {
    fn jet(&self, x: f64) -> [f64; 4] {
        (self.f)(x)
    }
}

fn antiperiodicity_defect(p: &dyn Profile) -> f64 {
    (0..CHECK_GRID)
        .map(|j| {
            let x = TAU * j as f64 / CHECK_GRID as f64;
            (p.jet(x + FRAC_PI_2)[0] + p.jet(x)[0]).abs()
        })
        .fold(0.0, f64::max)
}

/// Grid maximum of `g` refined three times around the best node.
fn grid_max(g: impl Fn(f64) -> f64) -> (f64, f64) {
    let h = TAU / CHECK_GRID as f64;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for j in 0..CHECK_GRID {
        let x = j as f64 * h;
        let v = g(x);
        if v > best.0 || v.is_nan() {
            best = (v, x);
        }
    }
    let mut width = h;
    for _ in 0..3 {
        let c = best.1;
        for k in -16..=16 {
            let x = c + width * k as f64 / 16.0;
            let v = g(x);
            if v > best.0 {
                best = (v, x);
            }
        }
        width /= 8.0;
    }
    best
}

/// Side data of an origin-centred parallelogram: lines with normal angles
/// `alpha1, alpha2, alpha1 + pi, alpha2 + pi` at distances `p1, p2, p1, p2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallelogramState {
    pub alpha1: f64,
    pub alpha2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl ParallelogramState {
    pub fn omega(&self) -> f64 {
        self.alpha2 - self.alpha1
    }

    pub fn perimeter(&self) -> f64 {
        4.0 * (self.p1 + self.p2) / self.omega().sin()
    }

    /// `p1 + p2 - sin(alpha2 - alpha1)`, zero on the perimeter-4 level.
    pub fn normalization_defect(&self) -> f64 {
        self.p1 + self.p2 - self.omega().sin()
    }

    pub fn sides(&self) -> [(f64, f64); 4] {
        [
            (self.alpha1, self.p1),
            (self.alpha2, self.p2),
            (self.alpha1 + PI, self.p1),
            (self.alpha2 + PI, self.p2),
        ]
    }

    /// The generator of the cyclic relabelling of sides.
    pub fn rotate_labels(&self) -> Self {
        Self {
            alpha1: self.alpha2,
            alpha2: self.alpha1 + PI,
            p1: self.p2,
            p2: self.p1,
        }
    }

    pub fn vertices(&self) -> [PlanePoint; 4] {
        let s = self.sides();
        std::array::from_fn(|i| {
            let (a, p) = s[i];
            let (b, q) = s[(i + 1) % 4];
            support_lines_meet(a, p, b, q).unwrap_or(PlanePoint::new(f64::NAN, f64::NAN))
        })
    }
}

/// The parallelogram of the invariant family at parameter `x`.
pub fn parallelogram_orbit(profile: &dyn Profile, x: f64) -> Result<ParallelogramState> {
    let [f, df, _, _] = profile.jet(x);
    if !(df.abs() < 2.0) {
        return Err(Error::FPrimeBound { x, value: df.abs() });
    }
    let s = (4.0 - df * df).sqrt();
    let half = 0.5 * (0.5 * df).acos();
    Ok(ParallelogramState {
        alpha1: x - half,
        alpha2: x + half,
        p1: (s - 2.0 * f) / 4.0,
        p2: (s + 2.0 * f) / 4.0,
    })
}

/// `alpha(x)` and `alpha'(x)` of the first side.
fn alpha_of_x(profile: &dyn Profile, x: f64) -> (f64, f64) {
    let [_, df, ddf, _] = profile.jet(x);
    let s = (4.0 - df * df).sqrt();
    (x - 0.5 * (0.5 * df).acos(), 1.0 + ddf / (2.0 * s))
}

/// `[p, dp/dalpha, d2p/dalpha2]` of the table at the point with parameter `x`.
fn support_jet_at_x(profile: &dyn Profile, x: f64) -> [f64; 3] {
    let [f, f1, f2, f3] = profile.jet(x);
    let s = (4.0 - f1 * f1).sqrt();
    let s3 = s * s * s;
    let p = (s - 2.0 * f) / 4.0;
    let px = (-f1 * f2 / s - 2.0 * f1) / 4.0;
    let pxx = (-(f2 * f2 + f1 * f3) / s - f1 * f1 * f2 * f2 / s3 - 2.0 * f2) / 4.0;
    let ax = 1.0 + f2 / (2.0 * s);
    let axx = f3 / (2.0 * s) + f1 * f2 * f2 / (2.0 * s3);
    [p, px / ax, (pxx * ax - px * axx) / (ax * ax * ax)]
}

pub struct FourPeriodicTable {
    pub oval: SupportOval,
    pub min_alpha_prime: f64,
    profile: Arc<dyn Profile>,
}

impl fmt::Debug for FourPeriodicTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourPeriodicTable")
            .field("oval", &self.oval)
            .field("min_alpha_prime", &self.min_alpha_prime)
            .finish()
    }
}

impl FourPeriodicTable {
    pub fn profile(&self) -> &dyn Profile {
        self.profile.as_ref()
    }

    pub fn parallelogram(&self, x: f64) -> ParallelogramState {
        parallelogram_orbit(self.profile.as_ref(), x).expect("profile checked at construction")
    }

    /// Normal angle of the tangency point with parameter `x`.
    pub fn alpha(&self, x: f64) -> f64 {
        alpha_of_x(self.profile.as_ref(), x).0
    }

    /// Support data `[p, dp/dalpha, d2p/dalpha2]` at parameter `x`.
    pub fn support_jet(&self, x: f64) -> [f64; 3] {
        support_jet_at_x(self.profile.as_ref(), x)
    }

    /// Parameter `x` of the tangency point with normal angle `a`.
    pub fn x_of_alpha(&self, a: f64) -> f64 {
        invert_alpha(self.profile.as_ref(), a)
    }
}

fn invert_alpha(profile: &dyn Profile, a: f64) -> f64 {
    roots::safe_newton(
        |x| {
            let (al, d) = alpha_of_x(profile, x);
            (al - a, d)
        },
        a,
        a + FRAC_PI_2,
        1e-15,
        200,
    )
}

pub fn from_f(profile: Arc<dyn Profile>) -> Result<FourPeriodicTable> {
    from_f_with(profile, crate::oval::DEFAULT_SAMPLES)
}

/// Build the table for `profile`, resampled on `samples` normal angles.
pub fn from_f_with(profile: Arc<dyn Profile>, samples: usize) -> Result<FourPeriodicTable> {
    let pr = profile.as_ref();
    let (fmax, at) = grid_max(|x| pr.jet(x)[1].abs());
    if !(fmax < 2.0) {
        return Err(Error::FPrimeBound { x: at, value: fmax });
    }
    let (neg_min, at) = grid_max(|x| -alpha_of_x(pr, x).1);
    let min_alpha_prime = -neg_min;
    if !(min_alpha_prime > 0.0) {
        return Err(Error::NonMonotone {
            x: at,
            value: min_alpha_prime,
        });
    }
    let h = TAU / samples as f64;
    let mut p = Vec::with_capacity(samples);
    let mut dp = Vec::with_capacity(samples);
    let mut ddp = Vec::with_capacity(samples);
    for j in 0..samples {
        let a = j as f64 * h;
        let x = invert_alpha(pr, a);
        let jet = support_jet_at_x(pr, x);
        if !(jet[0] + jet[2] > 0.0) {
            return Err(Error::Convexity {
                alpha: a,
                radius: jet[0] + jet[2],
            });
        }
        p.push(jet[0]);
        dp.push(jet[1]);
        ddp.push(jet[2]);
    }
    let oval = SupportOval::from_hermite(p, dp, ddp)?;
    let report = oval.validate();
    if !report.passed {
        if report.min_radius <= 0.0 {
            return Err(Error::Convexity {
                alpha: report.min_radius_at,
                radius: report.min_radius,
            });
        }
        return Err(Error::InvalidOval(report.failures.join("; ")));
    }
    Ok(FourPeriodicTable {
        oval,
        min_alpha_prime,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_profile_is_half_circle() {
        let t = from_f_with(Arc::new(FourPeriodicSpec::new(vec![]).unwrap()), 256).unwrap();
        for k in 0..20 {
            let a = 0.3 * k as f64;
            assert!((t.oval.p(a) - 0.5).abs() < 1e-15);
        }
        assert!((t.alpha(1.0) - (1.0 - PI / 4.0)).abs() < 1e-15);
        let q = t.parallelogram(0.4);
        assert!((q.perimeter() - 4.0).abs() < 1e-14);
        assert!((q.omega() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn tangent_slope_is_minus_half_fprime() {
        let spec = FourPeriodicSpec::new(vec![
            Harmonic { k: 2, sin: 0.1, cos: 0.02 },
            Harmonic { k: 6, sin: 0.01, cos: -0.02 },
        ])
        .unwrap();
        for k in 0..30 {
            let x = 0.21 * k as f64;
            let [_, dp, ddp] = support_jet_at_x(&spec, x);
            let [_, f1, f2, _] = spec.jet(x);
            let s = (4.0 - f1 * f1).sqrt();
            assert!((dp + 0.5 * f1).abs() < 1e-15);
            assert!((ddp + f2 * s / (2.0 * s + f2)).abs() < 1e-14);
        }
    }

    #[test]
    fn spec_rejections() {
        assert!(matches!(
            FourPeriodicSpec::new(vec![Harmonic { k: 4, sin: 0.1, cos: 0.0 }]),
            Err(Error::Antiperiodicity { .. })
        ));
        assert!(matches!(
            FourPeriodicSpec::new(vec![Harmonic { k: 2, sin: 0.0, cos: 0.1 }]),
            Err(Error::NotNormalized { .. })
        ));
        let e = from_f(Arc::new(FourPeriodicSpec::sin2(1.1))).unwrap_err();
        assert!(matches!(e, Error::FPrimeBound { .. }));
        assert!(e.to_string().contains("f-prime bound violated"));
        assert!(ClosureProfile::new(|x| [x.sin(), x.cos(), -x.sin(), -x.cos()]).is_err());
    }

    #[test]
    fn non_monotone_and_nonconvex_profiles() {
        let six = |c: f64| Arc::new(FourPeriodicSpec::new(vec![Harmonic { k: 6, sin: c, cos: 0.0 }]).unwrap());
        // alpha' = 1 - 9c at the crest of sin 6x
        assert!(matches!(from_f(six(0.12)).unwrap_err(), Error::NonMonotone { .. }));
        // p + p'' = 0.52 - 0.53 at the trough
        assert!(matches!(from_f(six(0.04)).unwrap_err(), Error::Convexity { .. }));
        assert!(from_f(six(0.02)).is_ok());
    }

    #[test]
    fn label_rotation_matches_parameter_shift() {
        let spec = FourPeriodicSpec::sin2(0.15);
        for k in 0..10 {
            let x = 0.37 * k as f64;
            let a = parallelogram_orbit(&spec, x).unwrap().rotate_labels();
            let b = parallelogram_orbit(&spec, x + FRAC_PI_2).unwrap();
            assert!((a.alpha1 - b.alpha1).abs() < 1e-14 && (a.alpha2 - b.alpha2).abs() < 1e-14);
            assert!((a.p1 - b.p1).abs() < 1e-14 && (a.p2 - b.p2).abs() < 1e-14);
        }
    }
}
