use serde::{Deserialize, Serialize};

/// Finite trigonometric series `a0 + sum_k (cos[k-1] cos k a + sin[k-1] sin k a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    pub a0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn degree(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    fn coeff(&self, k: usize) -> (f64, f64) {
        (
            self.cos.get(k - 1).copied().unwrap_or(0.0),
            self.sin.get(k - 1).copied().unwrap_or(0.0),
        )
    }

    /// `[p, p', p'']` at `a`.
    pub fn jet(&self, a: f64) -> [f64; 3] {
        let (s1, c1) = a.sin_cos();
        let (mut ck, mut sk) = (1.0, 0.0);
        let mut out = [self.a0, 0.0, 0.0];
        for k in 1..=self.degree() {
            // (cos ka, sin ka) by rotation
            let c = ck * c1 - sk * s1;
            let s = sk * c1 + ck * s1;
            ck = c;
            sk = s;
            let (ak, bk) = self.coeff(k);
            let kf = k as f64;
            out[0] += ak * c + bk * s;
            out[1] += kf * (bk * c - ak * s);
            out[2] -= kf * kf * (ak * c + bk * s);
        }
        out
    }

    /// `int_0^a p`.
    pub fn primitive(&self, a: f64) -> f64 {
        let mut acc = self.a0 * a;
        for k in 1..=self.degree() {
            let (ak, bk) = self.coeff(k);
            let kf = k as f64;
            let (s, c) = (kf * a).sin_cos();
            acc += ak * s / kf + bk * (1.0 - c) / kf;
        }
        acc
    }

    pub fn centrally_symmetric(&self) -> bool {
        (1..=self.degree())
            .step_by(2)
            .all(|k| self.coeff(k) == (0.0, 0.0))
    }
}
