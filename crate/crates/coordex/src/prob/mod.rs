//! Discrete probability objects over named finite alphabets.
//!
//! Joint distributions and conditional kernels are dense tensors in
//! row-major layout; every operation addresses axes by name so callers
//! never juggle raw indices. Information quantities are in bits.

mod dist;
mod kernel;
mod seq;

pub use dist::JointDistribution;
pub use kernel::ConditionalKernel;
pub use seq::{empirical_distribution, is_typical, SymbolSequence};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries below this are treated as exact zeros inside information
/// measures, so `0 log 0 = 0` is never left to floating-point luck.
pub const ZERO_CUTOFF: f64 = 1e-15;

/// Absolute slack allowed when validating that probabilities sum to one.
pub const NORMALIZATION_TOL: f64 = 1e-9;


/// A named finite alphabet; symbols are `0..size`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    pub name: String,
    pub size: usize,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Alphabet {
            name: name.into(),
            size,
        }
    }
}

pub(crate) fn validate_axes(axes: &[Alphabet]) -> Result<()> {
    if axes.is_empty() {
        return Err(Error::EmptySelection);
    }
    for (i, a) in axes.iter().enumerate() {
        if a.size == 0 {
            return Err(Error::AlphabetMismatch(format!(
                "axis `{}` has empty alphabet",
                a.name
            )));
        }
        if axes[..i].iter().any(|b| b.name == a.name) {
            return Err(Error::DuplicateAxis(a.name.clone()));
        }
    }
    Ok(())
}

pub(crate) fn validate_probs(probs: &[f64], expected_len: usize) -> Result<()> {
    if probs.len() != expected_len {
        return Err(Error::ShapeMismatch {
            expected: expected_len,
            got: probs.len(),
        });
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::NegativeEntry { index: i, value: p });
        }
    }
    Ok(())
}

/// Row-major strides for the given axis sizes (last axis is fastest).
pub(crate) fn strides_of(sizes: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }
    strides
}

/// Shannon entropy in bits of an unnormalized nonnegative table.
pub(crate) fn entropy_of_table(table: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in table {
        if p > ZERO_CUTOFF {
            h -= p * p.log2();
        }
    }
    h
}

/// Clamp tiny negative values produced by cancellation; entropies and
/// (conditional) mutual informations are nonnegative exactly.
pub(crate) fn clamp_info(v: f64) -> f64 {
    if v < 0.0 {
        0.0
    } else {
        v
    }
}
