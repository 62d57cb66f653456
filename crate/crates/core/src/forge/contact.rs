//! Coordinates on the space of perimeter-4 origin-centred parallelograms in
//! which the distribution of admissible motions is `ker(y dx - dz)`.

use super::four_periodic::{parallelogram_orbit, ParallelogramState, Profile};
use crate::error::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub fn contact_coordinates(s: &ParallelogramState) -> ContactPoint {
    ContactPoint {
        x: 0.5 * (s.alpha1 + s.alpha2),
        y: 2.0 * s.omega().cos(),
        z: s.p2 - s.p1,
    }
}

/// Inverse of [`contact_coordinates`] on the perimeter-4 level.
pub fn from_contact(c: &ContactPoint) -> ParallelogramState {
    let w = (0.5 * c.y).clamp(-1.0, 1.0).acos();
    let sw = w.sin();
    ParallelogramState {
        alpha1: c.x - 0.5 * w,
        alpha2: c.x + 0.5 * w,
        p1: 0.5 * (sw - c.z),
        p2: 0.5 * (sw + c.z),
    }
}

/// `|y - dz/dx|` along the family of `profile` at `x`, by central differences.
pub fn legendrian_defect(profile: &dyn Profile, x: f64, h: f64) -> Result<f64> {
    let c = contact_coordinates(&parallelogram_orbit(profile, x)?);
    let zp = contact_coordinates(&parallelogram_orbit(profile, x + h)?).z;
    let zm = contact_coordinates(&parallelogram_orbit(profile, x - h)?).z;
    Ok((c.y - (zp - zm) / (2.0 * h)).abs())
}
