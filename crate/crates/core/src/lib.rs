//! Numerical core: normalized Jacobi expansions, weighted Lebesgue norms,
//! generalized translation operators, moduli of smoothness and polynomial
//! approximation on `[-1, 1]`.
#![no_std]
// negated comparisons reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod approx;
pub mod error;
pub mod function;
pub mod jacobi;
pub mod lsq;
pub mod quadrature;
pub mod search;
pub mod smoothness;
pub mod translation;
pub mod weighted;

pub use error::{Error, Result};
