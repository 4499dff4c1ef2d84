//! Lattice phase-field approximation of Griffith brittle fracture.
//!
//! The crate evaluates finite-difference energies on `δZ^d ∩ Ω` built from
//! projected difference quotients, a sign-split discrete divergence and a
//! discrete Modica–Mortola term. It also provides the interpolation and
//! recovery constructions used to compare these energies with the continuum
//! Griffith functional, an alternate-minimization solver, and a small
//! experiment harness.

pub mod energy;
pub mod error;
pub mod harness;
pub mod interpolation;
pub mod lattice;
pub mod operators;
pub mod quadrature;
pub mod recovery;
pub mod reduce;
pub mod solver;

pub use error::{Error, Result};
