//! Exact solutions of the degenerate two-level Maxwell-Bloch system built by
//! binary Darboux transformations, with black-box finite-difference
//! verification of every constructed solution.
//!
//! The small-matrix kernel in [`linalg`] and the Lax-matrix builders in
//! [`model`] are generic over the real scalar type; the solution evaluators
//! work in `f64`, which the aliases below name.

// `!(x > eps)` comparisons are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod broadening;
pub mod closedforms;
pub mod darboux;
pub mod error;
pub mod linalg;
pub mod model;
pub mod perturbation;
pub mod scalar;
pub mod seeds;
#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision complex number used by all solution evaluators.
pub type C64 = num_complex::Complex<f64>;

pub type Vector3 = linalg::ComplexVector3<f64>;
pub type Matrix3 = linalg::ComplexMatrix3<f64>;
pub type Projector = linalg::Projector<f64>;
pub type BlochComponents = model::BlochComponents<f64>;

pub type Vector3f32 = linalg::ComplexVector3<f32>;
pub type Matrix3f32 = linalg::ComplexMatrix3<f32>;
