//! Two-party secure computation of the Pearson sample correlation.
//!
//! Two data holders each own one real-valued sample vector of the same
//! length. They standardize locally, round the z-scores to a fixed-point
//! grid, and compute the scalar product of the grid values under additive
//! secret sharing with Beaver triples over a prime field.
//!
//! * [`protocol::Variant::Exact`] additionally exchanges the rounding errors
//!   and two cross sums, which makes the output equal the plaintext
//!   correlation at the price of a declared leakage.
//! * [`protocol::Variant::Approximate`] reveals nothing beyond its output,
//!   which differs from the plaintext correlation by a bounded amount.
//!
//! The [`leakage`] module quantifies what the exact variant's leakage lets a
//! curious participant infer.

pub mod cli;
pub mod field;
pub mod fixedpoint;
pub mod leakage;
pub mod mpc;
pub mod net;
pub mod params;
pub mod protocol;
pub mod stats;
