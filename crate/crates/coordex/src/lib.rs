//! Coordination over noisy channels with two-sided state information.
//!
//! The crate has three layers. `prob` holds dense distributions and
//! kernels over named finite alphabets. `scenario` describes who sees
//! what (source, channel, encoder and decoder causality) and evaluates
//! the information constraints that decide whether a target behavior is
//! reachable. `optimizer` searches over auxiliary variables for the best
//! constraint value, and `sim` runs the corresponding block codes at
//! finite length to measure how often the empirical behavior stays close
//! to the target.

pub mod error;
pub mod optimizer;
pub mod prob;
pub mod scenario;
pub mod sim;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
