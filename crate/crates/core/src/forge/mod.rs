//! Constructions of tables with an invariant curve of 4-periodic points.
//!
//! Two routes are provided: the explicit family parameterized by a profile
//! `f(x)` with `f(x + pi/2) = -f(x)`, `|f'| < 2`, and the arc-extension
//! construction that completes a quarter of a support function.

mod contact;
mod four_periodic;
mod radon;

pub use contact::{contact_coordinates, from_contact, legendrian_defect, ContactPoint};
pub use four_periodic::{
    from_f, from_f_with, parallelogram_orbit, ClosureProfile, FourPeriodicSpec, FourPeriodicTable, Harmonic,
    ParallelogramState, Profile,
};
pub use radon::{fornberg_weights, radon_like, radon_like_with, ArcInput, RadonTable};

use crate::error::{Error, Result};
use crate::oval::SupportOval;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// On-disk description of a construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TableSpec {
    FourPeriodic {
        #[serde(default)]
        harmonics: Vec<Harmonic>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
    },
    /// The four-periodic table of `f(x) = cos(2t) sin(2x)`.
    EllipseFamily {
        t: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
    },
    /// Samples of `p` on `[0, pi/2]`, both ends included.
    RadonArc {
        p: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
    },
}

impl TableSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidOval(format!("table spec: {e}")))
    }
}

/// A constructed table with the diagnostics gathered while building it.
#[derive(Debug, Clone)]
pub struct Forged {
    pub oval: SupportOval,
    pub kind: &'static str,
    pub notes: Vec<(String, f64)>,
}

pub fn forge(spec: &TableSpec) -> Result<Forged> {
    match spec {
        TableSpec::FourPeriodic { harmonics, samples } => {
            let profile = FourPeriodicSpec::new(harmonics.clone())?;
            let table = from_f_with(Arc::new(profile), samples.unwrap_or(crate::oval::DEFAULT_SAMPLES))?;
            let notes = vec![("min_alpha_prime".to_string(), table.min_alpha_prime)];
            Ok(Forged {
                oval: table.oval,
                kind: "four-periodic",
                notes,
            })
        }
        TableSpec::EllipseFamily { t, samples } => {
            let profile = FourPeriodicSpec::sin2((2.0 * t).cos());
            let table = from_f_with(Arc::new(profile), samples.unwrap_or(crate::oval::DEFAULT_SAMPLES))?;
            let notes = vec![("min_alpha_prime".to_string(), table.min_alpha_prime)];
            Ok(Forged {
                oval: table.oval,
                kind: "ellipse-family",
                notes,
            })
        }
        TableSpec::RadonArc { p, samples } => {
            let t = radon_like_with(&ArcInput::Samples(p.clone()), samples.unwrap_or(crate::oval::DEFAULT_SAMPLES))?;
            let notes = vec![
                ("projection_defect".to_string(), t.projection_defect),
                ("seam_defect".to_string(), t.seam_defect),
            ];
            Ok(Forged {
                oval: t.oval,
                kind: "radon-arc",
                notes,
            })
        }
    }
}
