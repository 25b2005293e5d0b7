//! Numerical workbench for cocycles by isometries of `R^l` over compact base
//! dynamics (circle and torus rotations, finite cyclic shifts).
//!
//! The central object is the twisted cohomological equation
//!
//! ```text
//!     u(Tx) - Psi(x) u(x) = rho(x)
//! ```
//!
//! and its hyperbolized relative
//!
//! ```text
//!     lambda u_lambda(Tx) - Psi(x) u_lambda(x) = rho(x),     0 < lambda < 1,
//! ```
//!
//! which always has a unique bounded solution given by a geometric series
//! along forward orbits. The crate provides:
//!
//! * exact-arithmetic-friendly base dynamics ([`base`]),
//! * orthogonal twists and affine isometry cocycles ([`isometry`], [`cocycle`]),
//! * a closed-form registry of twists and observables ([`registry`]),
//! * twisted Birkhoff, Cesaro and Abel averaging ([`averaging`]),
//! * the hyperbolized solver and its lambda -> 1 diagnostics ([`solver`]),
//! * drift and displacement estimators ([`drift`]),
//! * independent oracles for cross-checking ([`oracle`]),
//! * a small config/experiment harness used by the `cocycle-forge` binary
//!   ([`config`], [`experiment`]).
//!
//! Conventions used throughout: circle and torus coordinates are stored in
//! turns (fractions of a full revolution, reduced mod 1), rotation angles of
//! fiber twists are in radians, and `lambda` always denotes the hyperbolization
//! parameter in `(0, 1)`.

pub mod averaging;
pub mod base;
pub mod cocycle;
pub mod config;
pub mod drift;
pub mod error;
pub mod experiment;
pub mod isometry;
pub mod numeric;
pub mod oracle;
pub mod registry;
pub mod section;
pub mod solver;

pub use error::{Error, Result};
