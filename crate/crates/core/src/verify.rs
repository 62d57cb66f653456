//! Invariant checks over a table and over random polygons, collected into a
//! machine-readable report.

use crate::billiard::{self, LinePairState};
use crate::genfun::{self, ChordConfig};
use crate::oval::SupportOval;
use crate::periodic;
use crate::polygon::{self, PolygonConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

pub const GRAD_TOL: f64 = 1e-6;
pub const HESS_TOL: f64 = 1e-4;
pub const CARTESIAN_TOL: f64 = 1e-8;
pub const SYMPLECTIC_TOL: f64 = 1e-6;
/// Gap range for random states is `[GAP_MARGIN, pi - GAP_MARGIN]`.
pub const GAP_MARGIN: f64 = 0.05;
const GRAD_STEP: f64 = 1e-5;
const HESS_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub skipped: bool,
    /// Measured defect or violation count.
    pub defect: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn measured(name: &str, defect: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: defect < tolerance,
            skipped: false,
            defect,
            tolerance,
            detail,
        }
    }

    fn count(name: &str, violations: usize, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: violations == 0,
            skipped: false,
            defect: violations as f64,
            tolerance: 0.0,
            detail,
        }
    }

    fn skipped(name: &str) -> Self {
        Self {
            name: name.into(),
            passed: false,
            skipped: true,
            defect: f64::NAN,
            tolerance: f64::NAN,
            detail: "skipped: table failed validation".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Random states per table suite.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 2000,
            seed: 1,
        }
    }
}

/// Uniform states with base angle on the circle and gap in
/// `[margin, pi - margin]`.
pub fn random_states(rng: &mut impl Rng, count: usize, margin: f64) -> Vec<LinePairState> {
    (0..count)
        .map(|_| {
            let a = rng.random_range(0.0..TAU);
            ChordConfig {
                alpha1: a,
                alpha2: a + rng.random_range(margin..PI - margin),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenfunStats {
    pub samples: usize,
    /// Largest `|closed - fd| / max(1, |closed|)` over both partials.
    pub grad_error: f64,
    pub hess_error: f64,
    pub sign_violations: usize,
}

pub fn genfun_stats(oval: &SupportOval, states: &[LinePairState]) -> GenfunStats {
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
    let rows: Vec<(f64, f64, bool)> = states
        .par_iter()
        .map(|s| {
            let (g1, g2) = genfun::grad_s(oval, s).unwrap_or((f64::NAN, f64::NAN));
            let (f1, f2) = genfun::fd_grad_s(oval, s, GRAD_STEP);
            let h = genfun::hess_s(oval, s).map_or([f64::NAN; 3], |h| [h.s11, h.s12, h.s22]);
            let fh = genfun::fd_hess_s(oval, s, HESS_STEP);
            let ge = rel(g1, f1).max(rel(g2, f2));
            let he = rel(h[0], fh.s11).max(rel(h[1], fh.s12)).max(rel(h[2], fh.s22));
            let signs = h[0] > 0.0 && h[2] > 0.0 && h[1] < 0.0;
            (if ge.is_nan() { f64::INFINITY } else { ge }, if he.is_nan() { f64::INFINITY } else { he }, signs)
        })
        .collect();
    GenfunStats {
        samples: states.len(),
        grad_error: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        hess_error: rows.iter().map(|r| r.1).fold(0.0, f64::max),
        sign_violations: rows.iter().filter(|r| !r.2).count(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleStats {
    pub samples: usize,
    /// Largest `|M_envelope - M_cartesian| / max(1, |M|)`.
    pub max_error: f64,
    pub failures: Vec<String>,
}

/// Each state is the exterior point where its tangent lines meet; its image
/// under the envelope step is compared with the Cartesian construction.
pub fn cartesian_stats(oval: &SupportOval, states: &[LinePairState]) -> OracleStats {
    let rows: Vec<Result<f64, String>> = states
        .par_iter()
        .map(|s| {
            let m = billiard::corner(oval, s);
            let next = billiard::step(oval, s).map_err(|e| e.to_string())?;
            let env = billiard::corner(oval, &next);
            let cart = billiard::cartesian_step(oval, m).map_err(|e| e.to_string())?;
            Ok(env.dist(cart) / env.norm().max(1.0))
        })
        .collect();
    let mut out = OracleStats {
        samples: states.len(),
        max_error: 0.0,
        failures: Vec::new(),
    };
    for r in rows {
        match r {
            Ok(e) => out.max_error = out.max_error.max(if e.is_nan() { f64::INFINITY } else { e }),
            Err(e) => out.failures.push(e),
        }
    }
    out
}

pub fn verify_table(oval: &SupportOval, opts: &VerifyOptions) -> VerifyReport {
    let mut checks = Vec::new();
    let v = oval.validate();
    checks.push(Check {
        name: "table.validation".into(),
        passed: v.passed,
        skipped: false,
        defect: v.failures.len() as f64,
        tolerance: 0.0,
        detail: if v.passed {
            format!("min p {:.6e}, min radius {:.6e}", v.min_p, v.min_radius)
        } else {
            v.failures.join("; ")
        },
    });
    let dependent = [
        "genfun.gradient",
        "genfun.hessian",
        "genfun.signs",
        "map.cartesian",
        "map.symplectic",
        "map.twist",
        "orbit.period3",
        "orbit.period4",
    ];
    if v.passed {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let states = random_states(&mut rng, opts.samples, GAP_MARGIN);
        let g = genfun_stats(oval, &states);
        checks.push(Check::measured("genfun.gradient", g.grad_error, GRAD_TOL, format!("{} states", g.samples)));
        checks.push(Check::measured("genfun.hessian", g.hess_error, HESS_TOL, format!("{} states", g.samples)));
        checks.push(Check::count("genfun.signs", g.sign_violations, "S11 > 0, S22 > 0, S12 < 0".into()));
        let c = cartesian_stats(oval, &states);
        let mut cart = Check::measured("map.cartesian", c.max_error, CARTESIAN_TOL, format!("{} points", c.samples));
        if !c.failures.is_empty() {
            cart.passed = false;
            cart.detail = format!("{} failures, first: {}", c.failures.len(), c.failures[0]);
        }
        checks.push(cart);
        let t = billiard::twist_report(oval, opts.samples);
        checks.push(Check::measured(
            "map.symplectic",
            t.max_symplectic_defect,
            SYMPLECTIC_TOL,
            format!("{} states", t.samples),
        ));
        checks.push(Check::count(
            "map.twist",
            t.violations,
            format!("min twist {:.6e}, min twist of square {:.6e}", t.min_twist, t.min_twist_squared),
        ));
        for (name, n) in [("orbit.period3", 3), ("orbit.period4", 4)] {
            checks.push(match periodic::find_periodic(oval, n, 1, None) {
                Ok(o) => {
                    let closure = periodic::closure_defect(oval, &o.angles, 1).unwrap_or(f64::INFINITY);
                    Check::measured(name, closure, 1e-8, format!("perimeter {:.15}, residual {:.3e}", o.perimeter, o.residual))
                }
                Err(e) => Check::count(name, 1, e.to_string()),
            });
        }
    } else {
        checks.extend(dependent.iter().map(|n| Check::skipped(n)));
    }
    checks.extend(polygon_checks(opts.seed, opts.samples.clamp(10, 2000)));
    VerifyReport { checks }
}

/// Random convex `n`-gon with gaps bounded away from `pi` and support values
/// near 1.
pub fn random_polygon(rng: &mut impl Rng, n: usize) -> PolygonConfig {
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

/// Uniform half exterior angles of an acute-angled configuration.
pub fn random_triangle_angles(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let u: f64 = rng.random_range(0.0..FRAC_PI_2);
        let v: f64 = rng.random_range(0.0..FRAC_PI_2);
        let w = PI - u - v;
        if u > 0.0 && v > 0.0 && w > 0.0 && w < FRAC_PI_2 {
            return [u, v, w];
        }
    }
}

pub fn polygon_checks(seed: u64, count: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let polys: Vec<PolygonConfig> = (0..count).map(|k| random_polygon(&mut rng, 3 + k % 6)).collect();
    let stats: Vec<[f64; 4]> = polys
        .par_iter()
        .map(|poly| {
            let n = poly.n();
            let v = poly.vertices();
            let mut geo = 0.0f64;
            let mut routes = 0.0f64;
            let mut level = 0.0f64;
            let mut unit = 0.0f64;
            let ones = PolygonConfig {
                alpha: poly.alpha.clone(),
                p: vec![1.0; n],
            };
            for i in 0..n {
                geo = geo.max((poly.side_length(i) - v[i].dist(v[(i + n - 1) % n])).abs());
                routes = routes.max((poly.phi(i) - poly.phi_by_determinant(i)).abs());
                level = level.max(poly.perimeter_derivative_along_xi(i).abs());
                let j = (i + 1) % n;
                let want = (0.5 * ones.gap(j)).tan() - (0.5 * ones.gap(i)).tan();
                unit = unit.max((ones.phi(j) - want).abs());
            }
            let sides: f64 = poly.side_lengths().iter().sum();
            [geo.max((sides - poly.perimeter()).abs()), routes, level, unit]
        })
        .collect();
    let col = |k: usize| stats.iter().map(|s| s[k]).fold(0.0, f64::max);
    let detail = format!("{} polygons, n = 3..8", polys.len());
    let mut out = vec![
        Check::measured("polygon.geometry", col(0), 1e-10, detail.clone()),
        Check::measured("polygon.phi_routes", col(1), 1e-11, detail.clone()),
        Check::measured("polygon.perimeter_level", col(2), 1e-10, detail.clone()),
        Check::measured("polygon.unit_support", col(3), 1e-11, detail),
    ];
    let regular = (3..=8)
        .flat_map(|n| {
            let poly = PolygonConfig::regular(n, 1.0, 0.0).expect("regular polygon");
            (0..n).map(move |i| poly.phi(i).abs())
        })
        .fold(0.0, f64::max);
    out.push(Check::measured("polygon.regular_phi", regular, 1e-12, "n = 3..8".into()));
    let growth = (3..=8)
        .filter(|&n| !PolygonConfig::regular(n, 1.0, 0.0).expect("regular polygon").growth_report().full())
        .count();
    out.push(Check::count("polygon.growth_regular", growth, "rank 2n - 1 for n = 3..8".into()));
    let bad = (0..count)
        .filter(|_| {
            let [u, v, w] = random_triangle_angles(&mut rng);
            polygon::triangle_wu(u, v, w).map_or(true, |t| {
                !(t.expression < 0.0 && t.w.iter().chain(&t.u).all(|&x| x > 0.0))
            })
        })
        .count();
    out.push(Check::count("triangle.obstruction", bad, format!("{count} angle triples")));
    out
}
