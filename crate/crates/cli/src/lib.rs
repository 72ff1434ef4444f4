//! Function corpus, verification drivers, experiments and report emission
//! on top of `gentrans-core`.

// negated comparisons reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod experiment;
pub mod report;
pub mod verify;

pub use error::{CliError, Result};
