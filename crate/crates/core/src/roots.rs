//! Bracketed scalar root finding used throughout the crate.
//!
//! All solvers here work on functions that are strictly monotone on the
//! bracket or at least change sign exactly once on it: a coarse scan picks
//! the first sign change, bisection shrinks it, and a couple of Newton steps
//! polish the result when a derivative is available.

/// Find the first sign change of `f` on `[lo, hi]` sampled at `nodes + 1`
/// equally spaced points. Returns the bracketing sub-interval.
pub fn scan_bracket<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, nodes: usize) -> Option<(f64, f64)> {
    let h = (hi - lo) / nodes as f64;
    let mut a = lo;
    let mut fa = f(a);
    if fa == 0.0 {
        return Some((a, a));
    }
    for k in 1..=nodes {
        let b = if k == nodes { hi } else { lo + h * k as f64 };
        let fb = f(b);
        if fb == 0.0 || (fa < 0.0) != (fb < 0.0) {
            return Some((a, b));
        }
        a = b;
        fa = fb;
    }
    None
}

/// Bisection on a sign-changing bracket down to width `xtol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Bisection followed by `polish` Newton steps that are only accepted while
/// they stay inside the final bracket and decrease `|f|`.
pub fn bisect_newton<F, D>(f: F, df: D, a: f64, b: f64, xtol: f64, polish: usize) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = bisect(&f, a, b, xtol);
    let (lo, hi) = (a.min(b) - xtol, a.max(b) + xtol);
    let mut fx = f(x);
    for _ in 0..polish {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let nx = x - fx / d;
        if !(lo..=hi).contains(&nx) {
            break;
        }
        let nf = f(nx);
        if nf.abs() > fx.abs() {
            break;
        }
        x = nx;
        fx = nf;
    }
    x
}

/// Safeguarded Newton iteration for a monotone function on `[a, b]`
/// with `f(a) <= 0 <= f(b)` (or the reverse); falls back to bisection
/// whenever a Newton step leaves the current bracket.
pub fn safe_newton<F>(fdf: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> f64
where
    F: Fn(f64) -> (f64, f64),
{
    let (fa, _) = fdf(a);
    let increasing = {
        let (fb, _) = fdf(b);
        fb >= fa
    };
    let mut x = 0.5 * (a + b);
    for _ in 0..max_iter {
        let (fx, dfx) = fdf(x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == increasing {
            b = x;
        } else {
            a = x;
        }
        let mut nx = x - fx / dfx;
        if !nx.is_finite() || nx <= a.min(b) || nx >= a.max(b) {
            nx = 0.5 * (a + b);
        }
        let done = (nx - x).abs() <= xtol;
        x = nx;
        if done {
            break;
        }
    }
    x
}
