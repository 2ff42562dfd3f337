//! Exact computations on dyadic step functions: the dyadic lattice over a root
//! cube, Lorentz quasi-norms, dyadic maximal operators (plain, fractional,
//! weighted and fractional-weighted), Muckenhoupt and multiplier weight
//! constants, Calderón–Zygmund decompositions with sparse certificates, and a
//! verification harness for the multiplier weak-type inequalities
//!
//! ```text
//! ‖w^{1/p} M f‖_{L^{p,∞}} ≲ ‖f‖_{L^p(w)},      ‖w M_α f‖_{L^{q,∞}} ≲ ‖f‖_{L^p(w^p)}.
//! ```
//!
//! Every supremum in this crate ranges over the finitely many cubes of the
//! lattice rooted at a fixed cube, so every constant is a finite maximum with a
//! witness cube. The crate is `no_std` and only needs `alloc`.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cz;
mod error;
pub mod grid;
pub mod harness;
pub mod lorentz;
mod math;
pub mod operators;
pub mod step;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{DyadicCube, GridSpec, Pyramid};
pub use step::StepFunction;
