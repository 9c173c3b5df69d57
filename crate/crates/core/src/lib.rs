//! Kernels, operators and Berezin geometry on the spaces `H_gamma(D^d)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod berezin;
pub mod cli;
pub mod error;
pub mod jets;
pub mod kernels;
pub mod numrange;
pub mod report;
pub mod sampling;
pub mod symbols;

pub use error::{Error, Result};
