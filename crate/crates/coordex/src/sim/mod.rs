//! Monte Carlo simulation of the block coding schemes.
//!
//! A trial draws one source realization, runs encoder and decoder over
//! a shared random codebook, and scores the empirical distribution of
//! the produced tuple against the target law in total variation. The
//! report aggregates the trial scores into an error-probability
//! estimate with a Wilson confidence interval and a breakdown of which
//! stage failed.
//!
//! Determinism contract: for a fixed config the per-trial and
//! per-codeword generator streams are fixed (see [`rng`]), every
//! random decision consumes exactly one uniform, and within a trial
//! the draw order is source symbols, then channel inputs, then channel
//! outputs, then reconstruction symbols. Reports are reproducible
//! bit-for-bit regardless of thread count.

pub mod codebook;
pub mod rng;

mod block_markov;
mod noncausal;

pub use block_markov::{simulate_block_markov, simulate_block_markov_detailed};
pub use codebook::{generate_codebook, generate_nested_codebook, Codebook, CODEBOOK_CAP};
pub use noncausal::{
    decode_noncausal, encode_noncausal, simulate_noncausal, simulate_noncausal_detailed,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{ConditionalKernel, JointDistribution, ZERO_CUTOFF};
use crate::sim::rng::draw_index;

/// How the codebook rate is chosen relative to the feasible window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatePolicy {
    /// Midpoint of the feasible rate window; errors out when the
    /// window is empty.
    Midpoint,
    /// Fixed rate in bits per symbol, feasible or not.
    Explicit(f64),
}

/// Simulation parameters. `eps_code` is the typicality slack used by
/// encoder and decoder, `eps_report` the total-variation radius that
/// counts as a coordination failure. `blocks` only matters for the
/// block-Markov scheme.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n: usize,
    pub eps_code: f64,
    pub eps_report: f64,
    pub trials: u64,
    pub seed: u64,
    pub rate_policy: RatePolicy,
    pub blocks: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 16,
            eps_code: 0.2,
            eps_report: 0.1,
            trials: 1000,
            seed: 0,
            rate_policy: RatePolicy::Midpoint,
            blocks: 8,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("block length must be positive".to_string()));
        }
        if !(self.eps_code > 0.0 && self.eps_code < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "eps_code must lie in (0, 1), got {}",
                self.eps_code
            )));
        }
        if !(self.eps_report > 0.0 && self.eps_report < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "eps_report must lie in (0, 1), got {}",
                self.eps_report
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trial count must be positive".to_string()));
        }
        if self.blocks < 2 {
            return Err(Error::InvalidConfig(format!(
                "block-Markov runs need at least two blocks, got {}",
                self.blocks
            )));
        }
        if let RatePolicy::Explicit(r) = self.rate_policy {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "explicit rate must be finite and nonnegative, got {r}"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of the decoder's codeword search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeStatus {
    /// Exactly one codeword passed the typicality test.
    Unique,
    /// Several passed; the payload is how many. The smallest index is
    /// still used for reconstruction.
    Ambiguous(u32),
    /// None passed; index 0 is used for reconstruction.
    None,
}

impl std::fmt::Display for DecodeStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DecodeStatus::Unique => f.write_str("unique"),
            DecodeStatus::Ambiguous(k) => write!(f, "ambiguous({k})"),
            DecodeStatus::None => f.write_str("none"),
        }
    }
}

/// Per-trial record.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Total variation between the realized empirical distribution and
    /// the target law.
    pub tv: f64,
    /// Whether the encoder found a jointly typical codeword.
    pub cover_ok: bool,
    pub decode_status: DecodeStatus,
    /// Index the encoder settled on.
    pub m: u64,
    /// Index the decoder settled on.
    pub m_hat: u64,
}

/// How many trials failed at each stage. A trial can contribute to
/// several counters at once.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureBreakdown {
    pub cover_failure: u64,
    pub decode_ambiguity: u64,
    pub decode_none: u64,
    pub tv_exceeded: u64,
}

/// Aggregated simulation result.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub trials: u64,
    /// Rate actually used, after resolving the rate policy.
    pub rate: f64,
    /// Fraction of trials with tv >= eps_report.
    pub p_error_estimate: f64,
    pub mean_tv: f64,
    /// 95% Wilson interval for the error probability.
    pub ci95: (f64, f64),
    pub failure_breakdown: FailureBreakdown,
}

const WILSON_Z: f64 = 1.959963984540054;

/// Error-probability estimate with a 95% Wilson score interval.
pub fn estimate_error(outcomes: &[TrialOutcome], eps_report: f64) -> (f64, (f64, f64)) {
    let n = outcomes.len().max(1) as f64;
    let k = outcomes.iter().filter(|o| o.tv >= eps_report).count() as f64;
    let p = k / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (p, ((center - half).max(0.0), (center + half).min(1.0)))
}

pub(crate) fn summarize(outcomes: &[TrialOutcome], cfg: &SimConfig, rate: f64) -> SimReport {
    let (p, ci95) = estimate_error(outcomes, cfg.eps_report);
    let mut breakdown = FailureBreakdown::default();
    let mut tv_sum = 0.0;
    for o in outcomes {
        tv_sum += o.tv;
        if !o.cover_ok {
            breakdown.cover_failure += 1;
        }
        match o.decode_status {
            DecodeStatus::Ambiguous(_) => breakdown.decode_ambiguity += 1,
            DecodeStatus::None => breakdown.decode_none += 1,
            DecodeStatus::Unique => {}
        }
        if o.tv >= cfg.eps_report {
            breakdown.tv_exceeded += 1;
        }
    }
    SimReport {
        n: cfg.n,
        trials: outcomes.len() as u64,
        rate,
        p_error_estimate: p,
        mean_tv: tv_sum / outcomes.len().max(1) as f64,
        ci95,
        failure_breakdown: breakdown,
    }
}

/// Read access the encoders use for source symbols. The default
/// `about_to_emit` hook is a no-op; audit tests override it to record
/// the causality watermark before each channel input is drawn.
pub trait SourceAccess {
    fn u(&self, i: usize) -> u16;
    fn s(&self, i: usize) -> u16;
    fn about_to_emit(&self, _i: usize) {}
}

/// Plain slice-backed access.
pub struct SliceSource<'a> {
    pub u: &'a [u16],
    pub s: &'a [u16],
}

impl SourceAccess for SliceSource<'_> {
    fn u(&self, i: usize) -> u16 {
        self.u[i]
    }

    fn s(&self, i: usize) -> u16 {
        self.s[i]
    }
}

/// Draws `n` i.i.d. triples from a three-axis source law, one uniform
/// per position.
pub fn sample_source<R: Rng + ?Sized>(
    n: usize,
    source: &JointDistribution,
    rng: &mut R,
) -> Result<(Vec<u16>, Vec<u16>, Vec<u16>)> {
    if source.axes().len() != 3 {
        return Err(Error::InvalidConfig(format!(
            "source law must have three axes, got {}",
            source.axes().len()
        )));
    }
    let ns = source.axes()[1].size;
    let nz = source.axes()[2].size;
    let mut u = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        let cell = draw_index(rng, source.probs());
        u.push((cell / (ns * nz)) as u16);
        s.push(((cell / nz) % ns) as u16);
        z.push((cell % nz) as u16);
    }
    Ok((u, s, z))
}

/// Passes input and state sequences through a memoryless channel, one
/// uniform per position. Undefined rows fall back to a uniform draw.
pub fn sample_channel<R: Rng + ?Sized>(
    x: &[u16],
    s: &[u16],
    channel: &ConditionalKernel,
    rng: &mut R,
) -> Result<Vec<u16>> {
    if x.len() != s.len() {
        return Err(Error::LengthMismatch(x.len(), s.len()));
    }
    let cols = channel.cols();
    let uniform = vec![1.0 / cols as f64; cols];
    let mut y = Vec::with_capacity(x.len());
    for (&xi, &si) in x.iter().zip(s) {
        let r = channel.row_index(&[xi as usize, si as usize]);
        let row = channel.row(r).unwrap_or(&uniform);
        y.push(draw_index(rng, row) as u16);
    }
    Ok(y)
}

/// Typicality test on raw occurrence counts, matching the sequence
/// test in `prob`: zero-mass cells must stay empty, the rest deviate
/// at most eps relative.
pub(crate) fn counts_typical(counts: &[u32], n: usize, probs: &[f64], eps: f64) -> bool {
    let nf = n as f64;
    for (&c, &q) in counts.iter().zip(probs) {
        if q <= ZERO_CUTOFF {
            if c > 0 {
                return false;
            }
        } else if (c as f64 / nf - q).abs() > eps * q {
            return false;
        }
    }
    true
}

/// Row-major strides of the named axes inside `dist`, used to index
/// occurrence counts laid out like the distribution's table.
pub(crate) fn scan_strides(dist: &JointDistribution, names: &[&str]) -> Result<Vec<usize>> {
    let sizes: Vec<usize> = dist.axes().iter().map(|a| a.size).collect();
    let mut strides = vec![0usize; names.len()];
    for (k, name) in names.iter().enumerate() {
        let pos = dist.axis_position(name)?;
        strides[k] = sizes[pos + 1..].iter().product();
    }
    Ok(strides)
}
