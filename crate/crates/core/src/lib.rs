//! Arithmetic and geometry of the stable-norm unit ball on hyperbolic
//! one-holed tori.
//!
//! The crate is organised bottom-up:
//!
//! * [`farey`] enumerates primitive classes of `Z^2`, Farey gaps and
//!   Stern-Brocot paths.
//! * [`precision`] holds the adaptive precision policy and certified
//!   interval arithmetic.
//! * [`markoff`] evaluates simple-closed-geodesic traces through the Fricke
//!   relations, exactly on the modular torus and with certified intervals on
//!   other surfaces.
//! * [`normball`] builds lengths, one-sided support functionals, corner
//!   atoms, gap turns and the inner/outer polygon sandwich.
//! * [`counting`] covers Markoff fibers, multiplicity scans, sector counts
//!   and the curvature-weighted Jarnik check.
//! * [`flatness`] estimates Diophantine flatness exponents of directions on
//!   the boundary of the ball.
//! * [`report`] holds the flat row types written as CSV or JSON.

pub mod counting;
pub mod error;
pub mod farey;
pub mod flatness;
pub mod markoff;
pub mod normball;
pub mod precision;
pub mod report;

#[cfg(test)]
mod test_oracle;

pub use error::{Error, Result};
