//! Finite symbol sequences, empirical distributions and typicality.

use super::{strides_of, Alphabet, ZERO_CUTOFF};
use crate::error::{Error, Result};
use crate::prob::JointDistribution;

/// A length-n sequence of symbols from one named alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolSequence {
    axis: Alphabet,
    values: Vec<usize>,
}

impl SymbolSequence {
    pub fn new(axis: Alphabet, values: Vec<usize>) -> Result<Self> {
        for &v in &values {
            if v >= axis.size {
                return Err(Error::SymbolOutOfRange {
                    axis: axis.name.clone(),
                    value: v,
                    size: axis.size,
                });
            }
        }
        Ok(SymbolSequence { axis, values })
    }

    pub fn axis(&self) -> &Alphabet {
        &self.axis
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Joint empirical distribution of equal-length sequences, one axis per
/// sequence, in the order given.
pub fn empirical_distribution(seqs: &[SymbolSequence]) -> Result<JointDistribution> {
    if seqs.is_empty() {
        return Err(Error::EmptySelection);
    }
    let n = seqs[0].len();
    if n == 0 {
        return Err(Error::EmptySelection);
    }
    for s in seqs {
        if s.len() != n {
            return Err(Error::LengthMismatch(n, s.len()));
        }
    }
    let axes: Vec<Alphabet> = seqs.iter().map(|s| s.axis.clone()).collect();
    let sizes: Vec<usize> = axes.iter().map(|a| a.size).collect();
    let strides = strides_of(&sizes);
    let cells: usize = sizes.iter().product();
    let mut counts = vec![0u64; cells];
    for t in 0..n {
        let mut flat = 0usize;
        for (s, &stride) in seqs.iter().zip(&strides) {
            flat += s.values[t] * stride;
        }
        counts[flat] += 1;
    }
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    JointDistribution::new(axes, probs)
}

/// Relative-deviation typicality: every cell must satisfy
/// |emp - target| <= eps * target, and cells with zero target probability
/// must have zero empirical probability.
pub fn is_typical(
    empirical: &JointDistribution,
    target: &JointDistribution,
    eps: f64,
) -> Result<bool> {
    if empirical.axes() != target.axes() {
        return Err(Error::AlphabetMismatch(
            "empirical and target axes differ".to_string(),
        ));
    }
    for (&p, &q) in empirical.probs().iter().zip(target.probs()) {
        if q <= ZERO_CUTOFF {
            if p > ZERO_CUTOFF {
                return Ok(false);
            }
        } else if (p - q).abs() > eps * q {
            return Ok(false);
        }
    }
    Ok(true)
}
