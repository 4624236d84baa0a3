//! Numerical laboratory for composition operators on Hardy spaces of the
//! polydisk, the ball and products of balls, and for the Monge-Ampère
//! capacities governing the decay of their approximation numbers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod compop;
pub mod domains;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod widths;

pub use error::{Error, Result};
