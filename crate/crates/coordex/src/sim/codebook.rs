//! Random codebooks of auxiliary sequences.
//!
//! Each outer index gets its own generator stream, so growing the rate
//! extends a codebook without disturbing the entries already drawn
//! (prefix property). The flat form stores i.i.d. pairs
//! (W1^n(m), W2^n(m)); the nested form stores cloud centers W1^n(m)
//! plus satellites W2^n(m, m_hat) drawn conditionally on the center.

use crate::error::{Error, Result};
use crate::prob::{ConditionalKernel, JointDistribution};
use crate::sim::rng::{draw_index, substream, TAG_CODEBOOK};

/// Hard ceiling on stored sequences; beyond this the search loops are
/// hopeless anyway.
pub const CODEBOOK_CAP: u64 = 1 << 22;

/// Number of indices for block length `n` at `rate` bits per symbol.
pub fn index_count(n: usize, rate: f64) -> Result<u64> {
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::InvalidConfig(format!("rate must be finite and nonnegative, got {rate}")));
    }
    // nudge below the exact power so ceil() is stable under fp rounding
    let raw = (2f64).powf(n as f64 * rate);
    let count = (raw - 1e-9).ceil().max(1.0);
    if count > CODEBOOK_CAP as f64 {
        return Err(Error::CodebookTooLarge { requested: count as u64, cap: CODEBOOK_CAP });
    }
    Ok(count as u64)
}

/// A realized codebook; sequences are immutable after generation and
/// shared read-only across trials.
#[derive(Clone, Debug)]
pub struct Codebook {
    n: usize,
    rate: f64,
    w1: Vec<Vec<u16>>,
    w2: Vec<Vec<u16>>,
    nested: Option<Vec<Vec<Vec<u16>>>>,
}

impl Codebook {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Number of outer indices.
    pub fn len(&self) -> usize {
        self.w1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w1.is_empty()
    }

    pub fn is_nested(&self) -> bool {
        self.nested.is_some()
    }

    pub fn w1(&self, m: usize) -> &[u16] {
        &self.w1[m]
    }

    /// Second sequence of the flat pair for index `m`.
    pub fn w2(&self, m: usize) -> &[u16] {
        &self.w2[m]
    }

    /// Satellite sequence for outer index `m` and inner index `m_hat`.
    pub fn nested_w2(&self, m: usize, m_hat: usize) -> &[u16] {
        &self.nested.as_ref().expect("flat codebook has no satellites")[m][m_hat]
    }
}

/// Draws `count` i.i.d. pairs of length `n` from a joint over exactly
/// two axes (first axis goes to w1, second to w2).
pub fn generate_codebook(
    n: usize,
    rate: f64,
    pair: &JointDistribution,
    seed: u64,
) -> Result<Codebook> {
    if pair.axes().len() != 2 {
        return Err(Error::InvalidConfig(format!(
            "codebook pair law must have two axes, got {}",
            pair.axes().len()
        )));
    }
    let count = index_count(n, rate)?;
    let cols = pair.axes()[1].size;
    let probs = pair.probs();
    let mut w1 = Vec::with_capacity(count as usize);
    let mut w2 = Vec::with_capacity(count as usize);
    for m in 0..count {
        let mut rng = substream(seed, TAG_CODEBOOK, m, 0);
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for _ in 0..n {
            let cell = draw_index(&mut rng, probs);
            a.push((cell / cols) as u16);
            b.push((cell % cols) as u16);
        }
        w1.push(a);
        w2.push(b);
    }
    Ok(Codebook { n, rate, w1, w2, nested: None })
}

/// Draws cloud centers from a single-axis law and, for every center,
/// a full ring of satellites from the conditional row of its symbols.
pub fn generate_nested_codebook(
    n: usize,
    rate: f64,
    center: &JointDistribution,
    satellite: &ConditionalKernel,
    seed: u64,
) -> Result<Codebook> {
    if center.axes().len() != 1 {
        return Err(Error::InvalidConfig(format!(
            "cloud center law must have one axis, got {}",
            center.axes().len()
        )));
    }
    let count = index_count(n, rate)?;
    let total = count.saturating_mul(1 + count);
    if total > CODEBOOK_CAP {
        return Err(Error::CodebookTooLarge { requested: total, cap: CODEBOOK_CAP });
    }
    let cols = satellite.cols();
    let uniform = vec![1.0 / cols as f64; cols];
    let mut w1 = Vec::with_capacity(count as usize);
    for m in 0..count {
        let mut rng = substream(seed, TAG_CODEBOOK, m, 0);
        let mut a = Vec::with_capacity(n);
        for _ in 0..n {
            a.push(draw_index(&mut rng, center.probs()) as u16);
        }
        w1.push(a);
    }
    let mut nested = Vec::with_capacity(count as usize);
    for (m, a) in w1.iter().enumerate() {
        let mut ring = Vec::with_capacity(count as usize);
        for m_hat in 0..count {
            let mut rng = substream(seed, TAG_CODEBOOK, m as u64, m_hat + 1);
            let mut b = Vec::with_capacity(n);
            for &sym in a {
                let row = satellite.row(sym as usize).unwrap_or(&uniform);
                b.push(draw_index(&mut rng, row) as u16);
            }
            ring.push(b);
        }
        nested.push(ring);
    }
    let w2 = Vec::new();
    Ok(Codebook { n, rate, w1, w2, nested: Some(nested) })
}
