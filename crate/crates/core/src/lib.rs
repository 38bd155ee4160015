//! Levi-Civita regularized planar restricted three-body problem.
//!
//! * [`dynamics`]: the Hamiltonians, the Levi-Civita map, exact first and
//!   second derivatives of the regularized Hamiltonian `K`, its vector field
//!   and the effective potential.
//! * [`lagrange`]: the five Lagrange points.
//! * [`convexity`]: sampling of the bounded earth component of `{K <= 0}`,
//!   positive-definiteness certificates, parameter scans and the `μ = 0`
//!   determinant analysis on the slice `v₂ = u₁ = 0`.
//! * [`flow`]: adaptive integration of the regularized flow, section
//!   crossings, return maps and symmetric periodic orbits.
//! * [`cli`]: the command-line front end and its file formats.
//!
//! The core math is generic over [`Scalar`] (`f32`/`f64`); the scans and the
//! flow run in `f64`, for which the aliases below are provided.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod convexity;
pub mod dynamics;
pub mod error;
pub mod flow;
pub mod format;
pub mod lagrange;
pub mod linalg;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ParamsF64 = dynamics::Params<f64>;
pub type ParamsF32 = dynamics::Params<f32>;
pub type PhasePointF64 = dynamics::PhasePoint<f64>;
pub type RegPointF64 = dynamics::RegPoint<f64>;
pub type RegPointF32 = dynamics::RegPoint<f32>;
pub type Tangent4F64 = dynamics::Tangent4<f64>;
pub type SymMat4F64 = linalg::SymMat4<f64>;
pub type SymMat4F32 = linalg::SymMat4<f32>;
