//! Periodic orbits as critical points of the circumscribed-perimeter action.
//!
//! An `(n, m)` configuration is a list of tangent-line angles
//! `a_1 < ... < a_n < a_1 + 2 pi m`, each consecutive gap in `(0, pi)`. Its
//! action is the cyclic sum of `S(a_i, a_{i+1})`, which equals the perimeter of
//! the circumscribed polygon minus `m` times the length of the oval.

use crate::billiard;
use crate::error::{Error, Result};
use crate::genfun::{raw_hessian, raw_radii, raw_s, ChordConfig};
use crate::geom::wrap_angle;
use crate::oval::SupportOval;
use crate::roots;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::Write;

/// Gaps must stay inside `(GAP_GUARD, pi - GAP_GUARD)` while iterating.
pub const GAP_GUARD: f64 = 1e-3;
const MAX_TRIGGERS: usize = 3;
/// Singular values of the action Hessian below this fraction of the largest
/// are treated as zero.
const PINV_RCOND: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub n: usize,
    pub m: usize,
    pub angles: Vec<f64>,
    pub perimeter: f64,
    pub residual: f64,
}

impl PeriodicOrbit {
    pub fn gaps(&self) -> Vec<f64> {
        gaps(&self.angles, self.m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("orbit serializes")
    }
}

fn gaps(angles: &[f64], m: usize) -> Vec<f64> {
    let n = angles.len();
    (0..n)
        .map(|i| next_angle(angles, i, m) - angles[i])
        .collect()
}

/// `a_{i+1}`, with the last angle followed by `a_1 + 2 pi m`.
fn next_angle(angles: &[f64], i: usize, m: usize) -> f64 {
    let n = angles.len();
    if i + 1 < n {
        angles[i + 1]
    } else {
        angles[0] + TAU * m as f64
    }
}

fn check_config(angles: &[f64], m: usize) -> Result<()> {
    if angles.len() < 2 || m == 0 {
        return Err(Error::InvalidPeriod(format!(
            "need at least two angles and m >= 1, got n = {}, m = {m}",
            angles.len()
        )));
    }
    for (i, w) in gaps(angles, m).into_iter().enumerate() {
        ChordConfig {
            alpha1: 0.0,
            alpha2: w,
        }
        .check()
        .map_err(|e| Error::InvalidPeriod(format!("gap {i}: {e}")))?;
    }
    Ok(())
}

pub fn total_action(oval: &SupportOval, angles: &[f64], m: usize) -> Result<f64> {
    check_config(angles, m)?;
    Ok(raw_action(oval, angles, m))
}

fn raw_action(oval: &SupportOval, angles: &[f64], m: usize) -> f64 {
    (0..angles.len())
        .map(|i| raw_s(oval, angles[i], next_angle(angles, i, m)))
        .sum()
}

/// Component `i` is `R2(a_{i-1}, a_i) - R1(a_i, a_{i+1})`.
pub fn action_gradient(oval: &SupportOval, angles: &[f64], m: usize) -> Result<Vec<f64>> {
    check_config(angles, m)?;
    Ok(raw_gradient(oval, angles, m))
}

fn raw_gradient(oval: &SupportOval, angles: &[f64], m: usize) -> Vec<f64> {
    let n = angles.len();
    // radii of chord i = (a_i, a_{i+1})
    let chords: Vec<(f64, f64)> = (0..n)
        .map(|i| raw_radii(oval, angles[i], next_angle(angles, i, m)))
        .collect();
    (0..n)
        .map(|i| chords[(i + n - 1) % n].1 - chords[i].0)
        .collect()
}

/// Cyclic tridiagonal Hessian of the action.
pub fn action_hessian(oval: &SupportOval, angles: &[f64], m: usize) -> Result<DMatrix<f64>> {
    check_config(angles, m)?;
    Ok(raw_action_hessian(oval, angles, m))
}

fn raw_action_hessian(oval: &SupportOval, angles: &[f64], m: usize) -> DMatrix<f64> {
    let n = angles.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        let c = raw_hessian(oval, angles[i], next_angle(angles, i, m));
        h[(i, i)] += c.s11;
        h[(j, j)] += c.s22;
        h[(i, j)] += c.s12;
        h[(j, i)] += c.s12;
    }
    h
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn feasible(angles: &[f64], m: usize) -> bool {
    gaps(angles, m)
        .iter()
        .all(|&w| w > GAP_GUARD && w < PI - GAP_GUARD)
}

#[derive(Debug, Clone, Copy)]
struct NewtonOptions {
    tol: f64,
    max_iter: usize,
    fix_first: bool,
}

/// Damped Newton on the action gradient; returns the final residual, which is
/// the max-norm of the free gradient components.
fn newton_critical(oval: &SupportOval, angles: &mut [f64], m: usize, opt: NewtonOptions) -> Result<f64> {
    let n = angles.len();
    let off = usize::from(opt.fix_first);
    let free_norm = |g: &[f64]| max_abs(&g[off..]);
    let mut g = raw_gradient(oval, angles, m);
    let mut res = free_norm(&g);
    let mut triggers = 0;
    for _ in 0..opt.max_iter {
        if res < opt.tol {
            return Ok(res);
        }
        let h = raw_action_hessian(oval, angles, m);
        let k = n - off;
        let hr = h.view((off, off), (k, k)).into_owned();
        let rhs = DVector::from_iterator(k, g[off..].iter().map(|x| -x));
        let svd = hr.svd(true, true);
        let smax = svd.singular_values.max();
        let dx = svd.solve(&rhs, PINV_RCOND * smax).map_err(|_| Error::NonConvergence {
            iterations: 0,
            residual: res,
        })?;
        let mut t = 1.0;
        let mut accepted = false;
        let mut counted = false;
        let mut trial = angles.to_vec();
        for _ in 0..40 {
            for i in 0..k {
                trial[i + off] = angles[i + off] + t * dx[i];
            }
            if !feasible(&trial, m) {
                if !counted {
                    triggers += 1;
                    counted = true;
                    if triggers > MAX_TRIGGERS {
                        return Err(Error::CollapsedGaps);
                    }
                }
                t *= 0.5;
                continue;
            }
            let gt = raw_gradient(oval, &trial, m);
            let rt = free_norm(&gt);
            if rt < res || t < 1e-6 {
                angles.copy_from_slice(&trial);
                g = gt;
                accepted = rt < res;
                res = rt;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res < opt.tol {
        Ok(res)
    } else {
        Err(Error::NonConvergence {
            iterations: opt.max_iter,
            residual: res,
        })
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn check_period(n: usize, m: usize) -> Result<()> {
    if n < 3 || m == 0 || 2 * m >= n || gcd(n, m) != 1 {
        return Err(Error::InvalidPeriod(format!(
            "need n >= 3, 1 <= m < n/2 and gcd(n, m) = 1, got n = {n}, m = {m}"
        )));
    }
    Ok(())
}

/// Evenly spaced angles starting at `a1`.
pub fn regular_seed(n: usize, m: usize, a1: f64) -> Vec<f64> {
    (0..n).map(|i| a1 + TAU * m as f64 * i as f64 / n as f64).collect()
}

/// Relabel cyclically so that the first angle is the smallest one mod `2 pi`,
/// and reduce it into `[0, 2 pi)`.
pub fn canonical_angles(angles: &[f64], m: usize) -> Vec<f64> {
    let n = angles.len();
    let g = gaps(angles, m);
    let start = (0..n)
        .min_by(|&i, &j| wrap_angle(angles[i]).total_cmp(&wrap_angle(angles[j])))
        .unwrap_or(0);
    let mut out = Vec::with_capacity(n);
    let mut a = wrap_angle(angles[start]);
    for k in 0..n {
        out.push(a);
        a += g[(start + k) % n];
    }
    out
}

/// Largest angular mismatch after stepping the map `n` times from the first
/// two lines of the configuration.
pub fn closure_defect(oval: &SupportOval, angles: &[f64], m: usize) -> Result<f64> {
    let n = angles.len();
    let start = ChordConfig::new(angles[0], next_angle(angles, 0, m))?;
    let mut s = start;
    let mut worst: f64 = 0.0;
    for k in 1..=n {
        s = billiard::step(oval, &s).map_err(|e| Error::OrbitStep {
            index: k,
            source: Box::new(e),
        })?;
        worst = worst.max(billiard::angle_gap(s.alpha2, next_angle(angles, k % n, m)));
    }
    worst = worst.max(billiard::angle_gap(s.alpha1, start.alpha1));
    Ok(worst)
}

pub fn find_periodic(oval: &SupportOval, n: usize, m: usize, seed: Option<&[f64]>) -> Result<PeriodicOrbit> {
    check_period(n, m)?;
    let mut angles = match seed {
        Some(s) if s.len() == n => s.to_vec(),
        Some(s) => {
            return Err(Error::InvalidPeriod(format!("seed has {} angles, expected {n}", s.len())));
        }
        None => regular_seed(n, m, 0.0),
    };
    check_config(&angles, m)?;
    let opts = NewtonOptions {
        tol: 1e-11,
        max_iter: 100,
        fix_first: false,
    };
    if let Err(e) = newton_critical(oval, &mut angles, m, opts) {
        if seed.is_some() {
            return Err(e);
        }
        angles = reduced_search(oval, n, m).ok_or(e)?;
    }
    let angles = canonical_angles(&angles, m);
    let residual = max_abs(&raw_gradient(oval, &angles, m));
    let closure = closure_defect(oval, &angles, m)?;
    if closure > 1e-8 {
        return Err(Error::NonConvergence {
            iterations: n,
            residual: closure,
        });
    }
    Ok(PeriodicOrbit {
        n,
        m,
        perimeter: raw_action(oval, &angles, m) + m as f64 * oval.perimeter(),
        angles,
        residual,
    })
}

/// Angles after the first, at the critical point with the first held at
/// `a1`, together with the leftover gradient component along `a1`.
fn reduced_point(oval: &SupportOval, n: usize, m: usize, a1: f64) -> Option<(Vec<f64>, f64)> {
    let mut angles = regular_seed(n, m, a1);
    let opts = NewtonOptions {
        tol: 1e-13,
        max_iter: 60,
        fix_first: true,
    };
    newton_critical(oval, &mut angles, m, opts).ok()?;
    let r = raw_gradient(oval, &angles, m)[0];
    Some((angles, r))
}

/// Fallback when Newton on all angles stalls, as it can on nearly round
/// tables: bracket the zeros of the leftover component over a grid of first
/// angles, bisect, and polish. Keeps the orbit of least action.
fn reduced_search(oval: &SupportOval, n: usize, m: usize) -> Option<Vec<f64>> {
    let grid = 16 * n;
    let a = |k: usize| TAU * k as f64 / grid as f64;
    let r: Vec<Option<f64>> = (0..grid)
        .into_par_iter()
        .map(|k| reduced_point(oval, n, m, a(k)).map(|p| p.1))
        .collect();
    let brackets: Vec<(f64, f64)> = (0..grid)
        .filter_map(|k| match (r[k], r[(k + 1) % grid]) {
            (Some(x), Some(y)) if x == 0.0 || x * y < 0.0 => Some((a(k), a(k) + TAU / grid as f64)),
            _ => None,
        })
        .collect();
    let opts = NewtonOptions {
        tol: 1e-11,
        max_iter: 20,
        fix_first: false,
    };
    brackets
        .into_par_iter()
        .filter_map(|(lo, hi)| {
            let f = |x: f64| reduced_point(oval, n, m, x).map_or(f64::NAN, |p| p.1);
            let root = roots::bisect(f, lo, hi, 1e-14);
            let (mut angles, _) = reduced_point(oval, n, m, root)?;
            newton_critical(oval, &mut angles, m, opts).ok()?;
            Some(angles)
        })
        .min_by(|x, y| raw_action(oval, x, m).total_cmp(&raw_action(oval, y, m)))
}

/// Independent minimiser of the action: a coarse multi-start search followed
/// by Nelder-Mead refinement. Best effort, never fails.
pub fn brute_oracle(oval: &SupportOval, n: usize, m: usize, grid_density: usize) -> PeriodicOrbit {
    use argmin::core::{CostFunction, Executor, State};
    use argmin::solver::neldermead::NelderMead;

    struct Action<'a> {
        oval: &'a SupportOval,
        m: usize,
    }
    impl CostFunction for Action<'_> {
        type Param = Vec<f64>;
        type Output = f64;
        fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
            let viol: f64 = gaps(x, self.m)
                .iter()
                .map(|&w| (GAP_GUARD - w).max(0.0) + (w - PI + GAP_GUARD).max(0.0))
                .sum();
            if viol > 0.0 {
                return Ok(1e6 * (1.0 + viol));
            }
            Ok(raw_action(self.oval, x, self.m))
        }
    }

    let grid = grid_density.max(2);
    let base = TAU * m as f64 / n as f64;
    // starting configurations: rotations of jittered regular polygons
    let mut starts: Vec<(f64, Vec<f64>)> = Vec::new();
    for i in 0..grid {
        let a1 = TAU * i as f64 / grid as f64;
        for j in 0..grid {
            let amp = 0.3 * base * (j as f64 / grid as f64);
            let x: Vec<f64> = (0..n)
                .map(|k| a1 + base * k as f64 + amp * ((k * (j + 1)) as f64 * 1.7).sin())
                .collect();
            if feasible(&x, m) {
                starts.push((raw_action(oval, &x, m), x));
            }
        }
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    starts.truncate(4);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (_, x0) in starts {
        let mut x = x0;
        for round in 0..6 {
            let size = 0.05 / 10f64.powi(round);
            let mut simplex = vec![x.clone()];
            for k in 0..n {
                let mut v = x.clone();
                v[k] += size;
                simplex.push(v);
            }
            let Ok(solver) = NelderMead::new(simplex).with_sd_tolerance(1e-16) else {
                break;
            };
            let run = Executor::new(Action { oval, m }, solver)
                .configure(|s| s.max_iters(4000))
                .run();
            match run {
                Ok(r) => {
                    if let Some(p) = r.state().get_best_param() {
                        x = p.clone();
                    }
                }
                Err(_) => break,
            }
        }
        let v = raw_action(oval, &x, m);
        if feasible(&x, m) && best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, x));
        }
    }
    let (v, x) = best.unwrap_or_else(|| {
        let x = regular_seed(n, m, 0.0);
        (raw_action(oval, &x, m), x)
    });
    let angles = canonical_angles(&x, m);
    PeriodicOrbit {
        n,
        m,
        residual: max_abs(&raw_gradient(oval, &angles, m)),
        perimeter: v + m as f64 * oval.perimeter(),
        angles,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub alpha1: f64,
    /// `|d action / d a_1|` at the critical point with `a_1` held fixed.
    pub residual: f64,
    /// Angular mismatch after `n` map steps.
    pub closure: f64,
    pub converged: bool,
}

impl ScanSample {
    pub fn closes(&self, tol: f64) -> bool {
        self.converged && self.residual < tol && self.closure < tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub n: usize,
    pub m: usize,
    pub tol: f64,
    pub samples: Vec<ScanSample>,
    pub max_residual: f64,
    pub max_closure: f64,
    pub closed: usize,
    /// Longest cyclic run of consecutive closing samples.
    pub longest_closed_run: usize,
    pub all_closed: bool,
}

impl ScanReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "alpha1,residual,closure,converged")?;
        for s in &self.samples {
            writeln!(w, "{:.17e},{:.6e},{:.6e},{}", s.alpha1, s.residual, s.closure, s.converged)?;
        }
        Ok(())
    }
}

/// Try to complete an `(n, m)` orbit through every sampled first angle.
///
/// For each `a_1` on a uniform grid of `[0, 2 pi)` the remaining angles are
/// found by Newton's method on the action with `a_1` held fixed. The first
/// angle then belongs to a periodic orbit exactly when the remaining gradient
/// component vanishes.
pub fn invariant_curve_scan(oval: &SupportOval, n: usize, m: usize, samples: usize, tol: f64) -> Result<ScanReport> {
    check_period(n, m)?;
    let samples_v: Vec<ScanSample> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let a1 = TAU * k as f64 / samples as f64;
            scan_point(oval, n, m, a1)
        })
        .collect();
    let mut rep = ScanReport {
        n,
        m,
        tol,
        max_residual: 0.0,
        max_closure: 0.0,
        closed: 0,
        longest_closed_run: 0,
        all_closed: false,
        samples: samples_v,
    };
    for s in &rep.samples {
        rep.max_residual = rep.max_residual.max(if s.converged { s.residual } else { f64::INFINITY });
        rep.max_closure = rep.max_closure.max(if s.converged { s.closure } else { f64::INFINITY });
        rep.closed += usize::from(s.closes(tol));
    }
    rep.all_closed = rep.closed == samples;
    rep.longest_closed_run = longest_cyclic_run(&rep.samples.iter().map(|s| s.closes(tol)).collect::<Vec<_>>());
    Ok(rep)
}

fn longest_cyclic_run(flags: &[bool]) -> usize {
    let n = flags.len();
    if flags.iter().all(|&f| f) {
        return n;
    }
    let (mut best, mut cur) = (0, 0);
    for k in 0..2 * n {
        if flags[k % n] {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best.min(n)
}

fn scan_point(oval: &SupportOval, n: usize, m: usize, a1: f64) -> ScanSample {
    let mut angles = regular_seed(n, m, a1);
    let solved = newton_critical(
        oval,
        &mut angles,
        m,
        NewtonOptions {
            tol: 1e-12,
            max_iter: 60,
            fix_first: true,
        },
    );
    match solved {
        Ok(_) => {
            let residual = raw_gradient(oval, &angles, m)[0].abs();
            let closure = closure_defect(oval, &angles, m).unwrap_or(f64::INFINITY);
            ScanSample {
                alpha1: a1,
                residual,
                closure,
                converged: true,
            }
        }
        Err(_) => ScanSample {
            alpha1: a1,
            residual: f64::INFINITY,
            closure: f64::INFINITY,
            converged: false,
        },
    }
}


#[cfg(test)]
mod solver_tests {
    use super::*;

    #[test]
    fn circle_orbits() {
        let c = SupportOval::circle(1.0);
        let o = find_periodic(&c, 3, 1, Some(&[0.2, 2.0, 4.5])).unwrap();
        assert!((o.perimeter - 6.0 * 3f64.sqrt()).abs() < 1e-9, "{o:?}");
        let o = find_periodic(&c, 4, 1, None).unwrap();
        assert!((o.perimeter - 8.0).abs() < 1e-12);
        let o = find_periodic(&c, 5, 2, None).unwrap();
        for g in o.gaps() {
            assert!((g - 4.0 * PI / 5.0).abs() < 1e-10);
        }
    }

    #[test]
    fn perturbed_triangle_against_oracle() {
        let o = SupportOval::fourier(1.0, vec![0.0, 0.0, 0.02], vec![]).unwrap();
        let b = brute_oracle(&o, 3, 1, 6);
        let f = find_periodic(&o, 3, 1, Some(&b.angles)).unwrap();
        eprintln!("{b:?}\n{f:?}");
        for (x, y) in f.angles.iter().zip(&b.angles) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn scans() {
        let c = SupportOval::circle(1.0);
        let r = invariant_curve_scan(&c, 4, 1, 64, 1e-8).unwrap();
        assert!(r.all_closed, "{}", r.max_residual);
        let o = SupportOval::fourier(1.0, vec![0.0, 0.0, 0.0, 0.05], vec![]).unwrap();
        let r = invariant_curve_scan(&o, 3, 1, 6283, 1e-8).unwrap();
        eprintln!("closed {} run {} max {}", r.closed, r.longest_closed_run, r.max_residual);
    }
}
