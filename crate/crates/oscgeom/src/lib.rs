//! Exact rational geometry for d-oscillators, convex cups and caps, the
//! randomized ball-slice extractor and the perturbed integer grid.
//!
//! Every predicate runs on exact rationals. Floating point only appears in
//! the Monte Carlo pose sampling of [`denseset::lowerbound`], and anything
//! produced there is re-verified exactly before it is returned.

pub mod combin;
pub mod convexsearch;
pub mod cupcap;
pub mod denseset;
pub mod error;
pub mod exactgeom;
mod lift;
pub mod oscillator;
pub mod par;

pub use error::{Error, Result};
pub use exactgeom::{PointSet, RatPoint, Rational};
