//! Singular values, ED polynomials and invariants of real binary tensors.
//!
//! A binary tensor of order d lives in (ℝ²)^{⊗d}. Its singular vector tuples are
//! the critical points of the distance to rank-one tensors; their number and the
//! product of their singular values are governed by partition combinatorics and a
//! handful of invariant polynomials, all of which are evaluated here.

// `!(x <= tol)` is deliberate throughout: a NaN residual must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod invariants;
pub mod io;
pub mod poly_engine;
pub mod scalar;
pub mod spectral;
pub mod tensor_core;

pub use error::{BtsError, Result};
