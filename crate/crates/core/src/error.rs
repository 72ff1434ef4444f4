use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// Arguments are individually valid but inconsistent with each other.
    #[error("contract violation: {0}")]
    Contract(String),
    /// A function produced a non-finite value at a sample point.
    #[error("non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },
    /// An adaptive rule ran out of refinements.
    #[error("no convergence after {refinements} refinements: last iterates {previous} and {last}")]
    NotConverged {
        refinements: usize,
        previous: f64,
        last: f64,
    },
    /// An iterative solver failed; `history` carries the residual trace.
    #[error("{solver} failed: {reason}")]
    Solver {
        solver: &'static str,
        reason: String,
        history: Vec<f64>,
    },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
