//! One-shot scheme: a single block with a noncausal encoder that sees
//! the whole source realization and a decoder that sees the whole
//! channel output.
//!
//! The encoder searches the codebook for the first pair jointly
//! typical with (u^n, s^n) and transmits through the input law
//! Q(x | u, s, w1, w2); the decoder searches for the first pair
//! jointly typical with (y^n, z^n) and reconstructs through
//! Q(v | y, z, w1, w2). Both fall back to index 0 when the search
//! comes up empty, and the trial keeps going so the realized
//! distribution is still scored.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prob::{ConditionalKernel, JointDistribution};
use crate::scenario::{assemble_joint, axis, AuxScheme, Scenario, ScenarioSpec, VISIBLE_AXES};
use crate::sim::codebook::{generate_codebook, Codebook};
use crate::sim::rng::{draw_index, substream, TAG_TRIAL};
use crate::sim::{
    counts_typical, sample_channel, sample_source, scan_strides, summarize, DecodeStatus,
    RatePolicy, SimConfig, SimReport, TrialOutcome,
};

/// First codebook index jointly typical with the source realization.
/// `reference` is the law of (U, S, W1, W2); axis order is free, the
/// names fix the layout. Returns (0, false) when nothing is typical.
pub fn encode_noncausal(
    u: &[u16],
    s: &[u16],
    codebook: &Codebook,
    reference: &JointDistribution,
    eps: f64,
) -> Result<(usize, bool)> {
    if u.len() != s.len() {
        return Err(Error::LengthMismatch(u.len(), s.len()));
    }
    if u.len() != codebook.n() {
        return Err(Error::LengthMismatch(u.len(), codebook.n()));
    }
    let st = scan_strides(reference, &[axis::U, axis::S, axis::W1, axis::W2])?;
    let base: Vec<usize> = u
        .iter()
        .zip(s)
        .map(|(&ui, &si)| ui as usize * st[0] + si as usize * st[1])
        .collect();
    let mut counts = vec![0u32; reference.len()];
    Ok(scan_cover(&base, codebook, st[2], st[3], &mut counts, reference.probs(), eps))
}

/// First codebook index jointly typical with the channel observation,
/// plus how many indices passed in total. `reference` is the law of
/// (Y, Z, W1, W2).
pub fn decode_noncausal(
    y: &[u16],
    z: &[u16],
    codebook: &Codebook,
    reference: &JointDistribution,
    eps: f64,
) -> Result<(usize, DecodeStatus)> {
    if y.len() != z.len() {
        return Err(Error::LengthMismatch(y.len(), z.len()));
    }
    if y.len() != codebook.n() {
        return Err(Error::LengthMismatch(y.len(), codebook.n()));
    }
    let st = scan_strides(reference, &[axis::Y, axis::Z, axis::W1, axis::W2])?;
    let base: Vec<usize> = y
        .iter()
        .zip(z)
        .map(|(&yi, &zi)| yi as usize * st[0] + zi as usize * st[1])
        .collect();
    let mut counts = vec![0u32; reference.len()];
    Ok(scan_list(&base, codebook, st[2], st[3], &mut counts, reference.probs(), eps))
}

fn fill_counts(
    base: &[usize],
    w1: &[u16],
    w2: &[u16],
    st_w1: usize,
    st_w2: usize,
    counts: &mut [u32],
) {
    counts.fill(0);
    for ((&b, &a), &c) in base.iter().zip(w1).zip(w2) {
        counts[b + a as usize * st_w1 + c as usize * st_w2] += 1;
    }
}

fn scan_cover(
    base: &[usize],
    codebook: &Codebook,
    st_w1: usize,
    st_w2: usize,
    counts: &mut [u32],
    probs: &[f64],
    eps: f64,
) -> (usize, bool) {
    let n = base.len();
    for m in 0..codebook.len() {
        fill_counts(base, codebook.w1(m), codebook.w2(m), st_w1, st_w2, counts);
        if counts_typical(counts, n, probs, eps) {
            return (m, true);
        }
    }
    (0, false)
}

fn scan_list(
    base: &[usize],
    codebook: &Codebook,
    st_w1: usize,
    st_w2: usize,
    counts: &mut [u32],
    probs: &[f64],
    eps: f64,
) -> (usize, DecodeStatus) {
    let n = base.len();
    let mut first = None;
    let mut hits = 0u32;
    for m in 0..codebook.len() {
        fill_counts(base, codebook.w1(m), codebook.w2(m), st_w1, st_w2, counts);
        if counts_typical(counts, n, probs, eps) {
            hits += 1;
            if first.is_none() {
                first = Some(m);
            }
        }
    }
    match (first, hits) {
        (Some(m), 1) => (m, DecodeStatus::Unique),
        (Some(m), k) => (m, DecodeStatus::Ambiguous(k)),
        (None, _) => (0, DecodeStatus::None),
    }
}

pub(crate) struct NoncausalEngine {
    source: JointDistribution,
    channel: ConditionalKernel,
    target: JointDistribution,
    ref_enc: JointDistribution,
    ref_dec: JointDistribution,
    enc_strides: Vec<usize>,
    dec_strides: Vec<usize>,
    vis_strides: Vec<usize>,
    x_given: ConditionalKernel,
    v_given: ConditionalKernel,
    pair: JointDistribution,
    uniform_x: Vec<f64>,
    uniform_v: Vec<f64>,
    rate_window: (f64, f64),
}

impl NoncausalEngine {
    pub(crate) fn build(spec: &ScenarioSpec, aux: &AuxScheme) -> Result<Self> {
        if spec.scenario() != Scenario::Noncausal {
            return Err(Error::InvalidConfig(format!(
                "one-shot simulation needs the noncausal scenario, got {}",
                spec.scenario()
            )));
        }
        let joint = assemble_joint(spec, aux)?;
        let ref_enc = joint.marginalize(&[axis::U, axis::S, axis::W1, axis::W2])?;
        let ref_dec = joint.marginalize(&[axis::Z, axis::W1, axis::W2, axis::Y])?;
        let x_given = joint
            .marginalize(&[axis::U, axis::S, axis::W1, axis::W2, axis::X])?
            .condition(&[axis::U, axis::S, axis::W1, axis::W2])?;
        let v_given = joint
            .marginalize(&[axis::Z, axis::W1, axis::W2, axis::Y, axis::V])?
            .condition(&[axis::Y, axis::Z, axis::W1, axis::W2])?;
        let pair = joint.marginalize(&[axis::W1, axis::W2])?;
        let lower = joint.mutual_information(&[axis::W1, axis::W2], &[axis::U, axis::S])?;
        let upper = joint.mutual_information(&[axis::W1, axis::W2], &[axis::Y, axis::Z])?;
        let target = spec.target_joint()?;
        let enc_strides = scan_strides(&ref_enc, &[axis::U, axis::S, axis::W1, axis::W2])?;
        let dec_strides = scan_strides(&ref_dec, &[axis::Y, axis::Z, axis::W1, axis::W2])?;
        let vis_strides = scan_strides(&target, &VISIBLE_AXES)?;
        let uniform_x = vec![1.0 / x_given.cols() as f64; x_given.cols()];
        let uniform_v = vec![1.0 / v_given.cols() as f64; v_given.cols()];
        Ok(NoncausalEngine {
            source: spec.source().clone(),
            channel: spec.channel().clone(),
            target,
            ref_enc,
            ref_dec,
            enc_strides,
            dec_strides,
            vis_strides,
            x_given,
            v_given,
            pair,
            uniform_x,
            uniform_v,
            rate_window: (lower, upper),
        })
    }

    pub(crate) fn resolve_rate(&self, policy: RatePolicy) -> Result<f64> {
        match policy {
            RatePolicy::Explicit(r) => Ok(r),
            RatePolicy::Midpoint => {
                let (lower, upper) = self.rate_window;
                if upper - lower <= 1e-9 {
                    Err(Error::InfeasibleRate { lower, upper })
                } else {
                    Ok(0.5 * (lower + upper))
                }
            }
        }
    }

    pub(crate) fn pair_law(&self) -> &JointDistribution {
        &self.pair
    }

    /// One full trial: draw, cover, transmit, decode, reconstruct,
    /// score. Consumes exactly 4n uniforms from the trial stream.
    pub(crate) fn run_trial(&self, codebook: &Codebook, cfg: &SimConfig, t: u64) -> TrialOutcome {
        let mut rng = substream(cfg.seed, TAG_TRIAL, t, 0);
        let n = cfg.n;
        let (u, s, z) = sample_source(n, &self.source, &mut rng)
            .expect("source law has three axes by construction");

        let enc_base: Vec<usize> = u
            .iter()
            .zip(&s)
            .map(|(&ui, &si)| ui as usize * self.enc_strides[0] + si as usize * self.enc_strides[1])
            .collect();
        let mut counts = vec![0u32; self.ref_enc.len()];
        let (m, cover_ok) = scan_cover(
            &enc_base,
            codebook,
            self.enc_strides[2],
            self.enc_strides[3],
            &mut counts,
            self.ref_enc.probs(),
            cfg.eps_code,
        );

        let w1 = codebook.w1(m);
        let w2 = codebook.w2(m);
        let mut x = Vec::with_capacity(n);
        for i in 0..n {
            let r = self.x_given.row_index(&[
                u[i] as usize,
                s[i] as usize,
                w1[i] as usize,
                w2[i] as usize,
            ]);
            let row = self.x_given.row(r).unwrap_or(&self.uniform_x);
            x.push(draw_index(&mut rng, row) as u16);
        }
        let y = sample_channel(&x, &s, &self.channel, &mut rng)
            .expect("input and state sequences share a length");

        let dec_base: Vec<usize> = y
            .iter()
            .zip(&z)
            .map(|(&yi, &zi)| yi as usize * self.dec_strides[0] + zi as usize * self.dec_strides[1])
            .collect();
        let mut counts = vec![0u32; self.ref_dec.len()];
        let (m_hat, decode_status) = scan_list(
            &dec_base,
            codebook,
            self.dec_strides[2],
            self.dec_strides[3],
            &mut counts,
            self.ref_dec.probs(),
            cfg.eps_code,
        );

        let w1h = codebook.w1(m_hat);
        let w2h = codebook.w2(m_hat);
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            let r = self.v_given.row_index(&[
                y[i] as usize,
                z[i] as usize,
                w1h[i] as usize,
                w2h[i] as usize,
            ]);
            let row = self.v_given.row(r).unwrap_or(&self.uniform_v);
            v.push(draw_index(&mut rng, row) as u16);
        }

        let mut vis = vec![0u32; self.target.len()];
        for i in 0..n {
            let idx = u[i] as usize * self.vis_strides[0]
                + s[i] as usize * self.vis_strides[1]
                + z[i] as usize * self.vis_strides[2]
                + x[i] as usize * self.vis_strides[3]
                + y[i] as usize * self.vis_strides[4]
                + v[i] as usize * self.vis_strides[5];
            vis[idx] += 1;
        }
        let tv = 0.5
            * vis
                .iter()
                .zip(self.target.probs())
                .map(|(&c, &q)| (c as f64 / n as f64 - q).abs())
                .sum::<f64>();

        TrialOutcome { tv, cover_ok, decode_status, m: m as u64, m_hat: m_hat as u64 }
    }
}

/// Runs the one-shot scheme and returns the report plus every trial
/// record, in trial order.
pub fn simulate_noncausal_detailed(
    spec: &ScenarioSpec,
    aux: &AuxScheme,
    cfg: &SimConfig,
) -> Result<(SimReport, Vec<TrialOutcome>)> {
    cfg.validate()?;
    let engine = NoncausalEngine::build(spec, aux)?;
    let rate = engine.resolve_rate(cfg.rate_policy)?;
    let codebook = generate_codebook(cfg.n, rate, engine.pair_law(), cfg.seed)?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| engine.run_trial(&codebook, cfg, t))
        .collect();
    let report = summarize(&outcomes, cfg, rate);
    Ok((report, outcomes))
}

/// Runs the one-shot scheme and returns the aggregated report.
pub fn simulate_noncausal(
    spec: &ScenarioSpec,
    aux: &AuxScheme,
    cfg: &SimConfig,
) -> Result<SimReport> {
    simulate_noncausal_detailed(spec, aux, cfg).map(|(report, _)| report)
}
