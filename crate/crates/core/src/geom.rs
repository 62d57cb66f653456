//! Plane points and support lines.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub const ORIGIN: PlanePoint = PlanePoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at angle `a`.
    pub fn unit(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// Determinant `[self, o]`.
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn rotate(self, a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for PlanePoint {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for PlanePoint {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<PlanePoint> for f64 {
    type Output = PlanePoint;
    fn mul(self, v: PlanePoint) -> PlanePoint {
        PlanePoint::new(self * v.x, self * v.y)
    }
}

impl Mul<f64> for PlanePoint {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(k * self.x, k * self.y)
    }
}

impl Neg for PlanePoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Intersection of the lines `x cos a1 + y sin a1 = p1` and
/// `x cos a2 + y sin a2 = p2`. `None` for (numerically) parallel lines.
pub fn support_lines_meet(a1: f64, p1: f64, a2: f64, p2: f64) -> Option<PlanePoint> {
    let s = (a2 - a1).sin();
    if s.abs() < 1e-14 {
        return None;
    }
    Some(PlanePoint::new(
        (p1 * a2.sin() - p2 * a1.sin()) / s,
        (p2 * a1.cos() - p1 * a2.cos()) / s,
    ))
}

/// Reduce an angle into `[0, 2pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let t = a.rem_euclid(std::f64::consts::TAU);
    if t >= std::f64::consts::TAU {
        0.0
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn square_corner() {
        let v = support_lines_meet(0.0, 1.0, FRAC_PI_2, 1.0).unwrap();
        assert!((v.x - 1.0).abs() < 1e-15 && (v.y - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parallel_lines_do_not_meet() {
        assert!(support_lines_meet(0.3, 1.0, 0.3 + std::f64::consts::PI, 1.0).is_none());
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(std::f64::consts::TAU), 0.0);
        assert!((wrap_angle(-0.5) - (std::f64::consts::TAU - 0.5)).abs() < 1e-15);
    }
}
