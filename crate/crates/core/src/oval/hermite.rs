//! Periodic piecewise-quintic Hermite interpolation on a uniform grid.
//!
//! Each cell carries the degree-5 polynomial matching value, first and second
//! derivative at both ends, so the interpolant is C2 and integrates exactly.

use rustfft::{num_complex::Complex, FftPlanner};
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSamples {
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub ddp: Vec<f64>,
    step: f64,
    cells: Vec<[f64; 6]>,
    /// `cumulative[j] = int_0^{j h} p`
    cumulative: Vec<f64>,
}

impl HermiteSamples {
    pub fn new(p: Vec<f64>, dp: Vec<f64>, ddp: Vec<f64>) -> Self {
        let n = p.len();
        assert!(n >= 8 && dp.len() == n && ddp.len() == n);
        let h = TAU / n as f64;
        let cells: Vec<[f64; 6]> = (0..n)
            .map(|j| {
                let k = (j + 1) % n;
                quintic_cell([p[j], dp[j], ddp[j]], [p[k], dp[k], ddp[k]], h)
            })
            .collect();
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for c in &cells {
            acc += h * cell_integral(c, 1.0);
            cumulative.push(acc);
        }
        Self {
            p,
            dp,
            ddp,
            step: h,
            cells,
            cumulative,
        }
    }

    /// Samples only: derivatives at the nodes come from the trigonometric
    /// interpolant of the samples (spectral differentiation).
    pub fn from_values(p: Vec<f64>) -> Self {
        let (dp, ddp) = spectral_derivatives(&p);
        Self::new(p, dp, ddp)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    fn locate(&self, a: f64) -> (usize, f64) {
        let n = self.p.len();
        let u = a.rem_euclid(TAU) / self.step;
        let j = (u.floor() as usize).min(n - 1);
        (j, (u - j as f64).clamp(0.0, 1.0))
    }

    pub fn jet(&self, a: f64) -> [f64; 3] {
        let (j, t) = self.locate(a);
        eval_cell(&self.cells[j], t, self.step)
    }

    /// `int_0^a p` for any real `a`.
    pub fn primitive(&self, a: f64) -> f64 {
        let n = self.p.len();
        let total = self.cumulative[n];
        let turns = (a / TAU).floor();
        let (j, t) = self.locate(a);
        turns * total + self.cumulative[j] + self.step * cell_integral(&self.cells[j], t)
    }

    pub fn centrally_symmetric(&self, tol: f64) -> bool {
        let n = self.p.len();
        n.is_multiple_of(2)
            && (0..n / 2).all(|j| {
                let k = j + n / 2;
                (self.p[j] - self.p[k]).abs() <= tol
                    && (self.dp[j] - self.dp[k]).abs() <= tol
                    && (self.ddp[j] - self.ddp[k]).abs() <= tol
            })
    }
}

/// Coefficients in the local variable `t = (a - a0)/h` of the quintic matching
/// `[value, d/da, d2/da2]` at both ends of a cell of width `h`.
pub(crate) fn quintic_cell(left: [f64; 3], right: [f64; 3], h: f64) -> [f64; 6] {
    let c0 = left[0];
    let c1 = h * left[1];
    let c2 = 0.5 * h * h * left[2];
    let a = right[0] - (c0 + c1 + c2);
    let b = h * right[1] - (c1 + 2.0 * c2);
    let c = h * h * right[2] - 2.0 * c2;
    [
        c0,
        c1,
        c2,
        10.0 * a - 4.0 * b + 0.5 * c,
        -15.0 * a + 7.0 * b - c,
        6.0 * a - 3.0 * b + 0.5 * c,
    ]
}

/// Value, first and second derivative of a cell polynomial at local `t`.
pub(crate) fn eval_cell(c: &[f64; 6], t: f64, h: f64) -> [f64; 3] {
    let v = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
    let d = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
    let dd = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
    [v, d / h, dd / (h * h)]
}

fn cell_integral(c: &[f64; 6], t: f64) -> f64 {
    let mut acc = 0.0;
    let mut tp = t;
    for (k, ck) in c.iter().enumerate() {
        acc += ck * tp / (k + 1) as f64;
        tp *= t;
    }
    acc
}

/// First and second derivatives of the trigonometric interpolant through
/// equally spaced periodic samples.
pub fn spectral_derivatives(p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = p.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut spec: Vec<Complex<f64>> = p.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut spec);
    let mut d1 = spec.clone();
    let mut d2 = spec;
    for k in 0..n {
        let freq = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let nyquist = n.is_multiple_of(2) && k == n / 2;
        d1[k] *= if nyquist {
            Complex::new(0.0, 0.0)
        } else {
            Complex::new(0.0, freq)
        };
        d2[k] *= -freq * freq;
    }
    inv.process(&mut d1);
    inv.process(&mut d2);
    let scale = 1.0 / n as f64;
    (
        d1.iter().map(|c| c.re * scale).collect(),
        d2.iter().map(|c| c.re * scale).collect(),
    )
}
