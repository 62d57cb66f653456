//! Outer billiards about smooth convex ovals, their periodic orbits, and
//! constructions of tables with prescribed invariant curves.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod billiard;
pub mod error;
pub mod forge;
pub mod genfun;
pub mod geom;
pub mod oval;
pub mod periodic;
pub mod polygon;
pub mod roots;
pub mod verify;

pub use error::{Error, Result};
pub use geom::PlanePoint;
pub use oval::{Jet, OvalDescriptor, SupportOval, ValidationReport};
