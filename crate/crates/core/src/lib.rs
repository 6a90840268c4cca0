//! Scattering data, spectral measures and dispersive propagator kernels for
//! half-line radial Schrödinger operators -d^2/dx^2 + l(l+1)/x^2 + q(x).

// NaN inputs are rejected by negated comparisons on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dd;
pub mod error;
mod par;
pub mod oscint;
pub mod potential;
pub mod propagator;
pub mod quad;
pub mod scattering;
pub mod solutions;
pub mod specfun;
pub mod table;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use potential::Potential;
pub use solutions::ProblemSpec;
