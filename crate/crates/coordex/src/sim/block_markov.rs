//! Block-Markov scheme for the causal-encoder scenario.
//!
//! Transmission runs over `blocks` blocks of length n. The cloud
//! center W1(m_b) carries the index chosen at the end of block b-1,
//! where the encoder covered the block b-1 source with a satellite
//! W2(m_{b-1}, m_b). Channel inputs are causal: X_i depends on the
//! current (u_i, s_i) and the active center only. The decoder works
//! one block behind, accepting an index only when the current block
//! looks like its center and the previous block looks like the
//! satellite hanging off its own decoded chain, then reconstructs the
//! previous block. Blocks 0..B-2 are scored against the target law;
//! the last block carries the final description and is never
//! reconstructed.
//!
//! Trial stream order: all source symbols first, then per block the
//! channel inputs, the channel outputs, and (from block 1 on) the
//! previous block's reconstruction. Index searches consume no
//! randomness.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prob::{ConditionalKernel, JointDistribution};
use crate::scenario::{assemble_joint, axis, AuxScheme, Scenario, ScenarioSpec, VISIBLE_AXES};
use crate::sim::codebook::{generate_nested_codebook, Codebook};
use crate::sim::rng::{draw_index, substream, TAG_TRIAL};
use crate::sim::{
    counts_typical, sample_channel, sample_source, scan_strides, summarize, DecodeStatus,
    RatePolicy, SimConfig, SimReport, SliceSource, SourceAccess, TrialOutcome,
};

fn worse(a: DecodeStatus, b: DecodeStatus) -> DecodeStatus {
    match (a, b) {
        (DecodeStatus::None, _) | (_, DecodeStatus::None) => DecodeStatus::None,
        (DecodeStatus::Ambiguous(x), DecodeStatus::Ambiguous(y)) => {
            DecodeStatus::Ambiguous(x.max(y))
        }
        (DecodeStatus::Ambiguous(x), _) | (_, DecodeStatus::Ambiguous(x)) => {
            DecodeStatus::Ambiguous(x)
        }
        _ => DecodeStatus::Unique,
    }
}

pub(crate) struct BlockMarkovEngine {
    source: JointDistribution,
    channel: ConditionalKernel,
    target: JointDistribution,
    /// Covering reference, law of (U, S, W1, W2).
    ref_cover: JointDistribution,
    /// Center reference, law of (Z, W1, Y).
    ref_center: JointDistribution,
    /// Satellite reference, law of (Z, W1, W2, Y).
    ref_sat: JointDistribution,
    cover_strides: Vec<usize>,
    center_strides: Vec<usize>,
    sat_strides: Vec<usize>,
    vis_strides: Vec<usize>,
    x_given: ConditionalKernel,
    v_given: ConditionalKernel,
    center_law: JointDistribution,
    satellite_law: ConditionalKernel,
    uniform_x: Vec<f64>,
    uniform_v: Vec<f64>,
    rate_window: (f64, f64),
}

impl BlockMarkovEngine {
    pub(crate) fn build(spec: &ScenarioSpec, aux: &AuxScheme) -> Result<Self> {
        if spec.scenario() != Scenario::CausalEncoding {
            return Err(Error::InvalidConfig(format!(
                "block-Markov simulation needs the causal-encoding scenario, got {}",
                spec.scenario()
            )));
        }
        let joint = assemble_joint(spec, aux)?;
        let ref_cover = joint.marginalize(&[axis::U, axis::S, axis::W1, axis::W2])?;
        let ref_center = joint.marginalize(&[axis::Z, axis::W1, axis::Y])?;
        let ref_sat = joint.marginalize(&[axis::Z, axis::W1, axis::W2, axis::Y])?;
        let x_given = joint
            .marginalize(&[axis::U, axis::S, axis::W1, axis::X])?
            .condition(&[axis::U, axis::S, axis::W1])?;
        let v_given = joint
            .marginalize(&[axis::Z, axis::W1, axis::W2, axis::Y, axis::V])?
            .condition(&[axis::Y, axis::Z, axis::W1, axis::W2])?;
        let center_law = joint.marginalize(&[axis::W1])?;
        let satellite_law = joint.marginalize(&[axis::W1, axis::W2])?.condition(&[axis::W1])?;
        let lower =
            joint.conditional_mutual_information(&[axis::W2], &[axis::U, axis::S], &[axis::W1])?;
        let upper = joint.mutual_information(&[axis::W1], &[axis::Y, axis::Z])?
            + joint.conditional_mutual_information(&[axis::W2], &[axis::Y, axis::Z], &[axis::W1])?;
        let target = spec.target_joint()?;
        let cover_strides = scan_strides(&ref_cover, &[axis::U, axis::S, axis::W1, axis::W2])?;
        let center_strides = scan_strides(&ref_center, &[axis::Y, axis::Z, axis::W1])?;
        let sat_strides = scan_strides(&ref_sat, &[axis::Y, axis::Z, axis::W1, axis::W2])?;
        let vis_strides = scan_strides(&target, &VISIBLE_AXES)?;
        let uniform_x = vec![1.0 / x_given.cols() as f64; x_given.cols()];
        let uniform_v = vec![1.0 / v_given.cols() as f64; v_given.cols()];
        Ok(BlockMarkovEngine {
            source: spec.source().clone(),
            channel: spec.channel().clone(),
            target,
            ref_cover,
            ref_center,
            ref_sat,
            cover_strides,
            center_strides,
            sat_strides,
            vis_strides,
            x_given,
            v_given,
            center_law,
            satellite_law,
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

    pub(crate) fn center_law(&self) -> &JointDistribution {
        &self.center_law
    }

    pub(crate) fn satellite_law(&self) -> &ConditionalKernel {
        &self.satellite_law
    }

    /// Covering search over satellites of the active center: first
    /// index whose satellite is jointly typical with the previous
    /// block's source.
    fn scan_cover<A: SourceAccess>(
        &self,
        acc: &A,
        start: usize,
        n: usize,
        codebook: &Codebook,
        m_prev: usize,
        counts: &mut [u32],
        eps: f64,
    ) -> (usize, bool) {
        let st = &self.cover_strides;
        let w1 = codebook.w1(m_prev);
        for m in 0..codebook.len() {
            let w2 = codebook.nested_w2(m_prev, m);
            counts.fill(0);
            for i in 0..n {
                let idx = acc.u(start + i) as usize * st[0]
                    + acc.s(start + i) as usize * st[1]
                    + w1[i] as usize * st[2]
                    + w2[i] as usize * st[3];
                counts[idx] += 1;
            }
            if counts_typical(counts, n, self.ref_cover.probs(), eps) {
                return (m, true);
            }
        }
        (0, false)
    }

    /// Decoder search at the end of a block: the candidate's center
    /// must fit the current observation and the satellite it selects
    /// off the decoded chain must fit the previous one.
    #[allow(clippy::too_many_arguments)]
    fn scan_decode(
        &self,
        y_cur: &[u16],
        z_cur: &[u16],
        y_prev: &[u16],
        z_prev: &[u16],
        codebook: &Codebook,
        m_hat_prev: usize,
        center_counts: &mut [u32],
        sat_counts: &mut [u32],
        eps: f64,
    ) -> (usize, DecodeStatus) {
        let n = y_cur.len();
        let cst = &self.center_strides;
        let sst = &self.sat_strides;
        let w1_prev = codebook.w1(m_hat_prev);
        let mut first = None;
        let mut hits = 0u32;
        for m in 0..codebook.len() {
            let w1 = codebook.w1(m);
            center_counts.fill(0);
            for i in 0..n {
                let idx = y_cur[i] as usize * cst[0]
                    + z_cur[i] as usize * cst[1]
                    + w1[i] as usize * cst[2];
                center_counts[idx] += 1;
            }
            if !counts_typical(center_counts, n, self.ref_center.probs(), eps) {
                continue;
            }
            let w2 = codebook.nested_w2(m_hat_prev, m);
            sat_counts.fill(0);
            for i in 0..n {
                let idx = y_prev[i] as usize * sst[0]
                    + z_prev[i] as usize * sst[1]
                    + w1_prev[i] as usize * sst[2]
                    + w2[i] as usize * sst[3];
                sat_counts[idx] += 1;
            }
            if counts_typical(sat_counts, n, self.ref_sat.probs(), eps) {
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

    /// Everything after the source draw. Encoder-side reads go through
    /// `acc` so tests can audit that emission at position i never
    /// touches source symbols past i.
    pub(crate) fn run_coded<A: SourceAccess>(
        &self,
        acc: &A,
        u_all: &[u16],
        s_all: &[u16],
        z_all: &[u16],
        codebook: &Codebook,
        cfg: &SimConfig,
        rng: &mut ChaCha8Rng,
    ) -> TrialOutcome {
        let n = cfg.n;
        let blocks = cfg.blocks;
        let mut cover_counts = vec![0u32; self.ref_cover.len()];
        let mut center_counts = vec![0u32; self.ref_center.len()];
        let mut sat_counts = vec![0u32; self.ref_sat.len()];
        let mut x_all = Vec::with_capacity(blocks * n);
        let mut y_all: Vec<u16> = Vec::with_capacity(blocks * n);
        let mut v_all: Vec<u16> = Vec::with_capacity((blocks - 1) * n);
        let mut m_enc = 0usize;
        let mut m_dec = 0usize;
        let mut cover_ok = true;
        let mut decode_status = DecodeStatus::Unique;

        for b in 0..blocks {
            let start = b * n;
            if b > 0 {
                let (m, ok) = self.scan_cover(
                    acc,
                    start - n,
                    n,
                    codebook,
                    m_enc,
                    &mut cover_counts,
                    cfg.eps_code,
                );
                cover_ok &= ok;
                m_enc = m;
            }
            let w1 = codebook.w1(m_enc);
            for i in 0..n {
                acc.about_to_emit(start + i);
                let r = self.x_given.row_index(&[
                    acc.u(start + i) as usize,
                    acc.s(start + i) as usize,
                    w1[i] as usize,
                ]);
                let row = self.x_given.row(r).unwrap_or(&self.uniform_x);
                x_all.push(draw_index(rng, row) as u16);
            }
            let y_block = sample_channel(
                &x_all[start..start + n],
                &s_all[start..start + n],
                &self.channel,
                rng,
            )
            .expect("block slices share a length");
            y_all.extend_from_slice(&y_block);

            if b > 0 {
                let prev = start - n;
                let m_hat_prev = m_dec;
                let (m_hat, status) = self.scan_decode(
                    &y_all[start..start + n],
                    &z_all[start..start + n],
                    &y_all[prev..prev + n],
                    &z_all[prev..prev + n],
                    codebook,
                    m_hat_prev,
                    &mut center_counts,
                    &mut sat_counts,
                    cfg.eps_code,
                );
                decode_status = worse(decode_status, status);
                m_dec = m_hat;
                let w1_prev = codebook.w1(m_hat_prev);
                let w2_prev = codebook.nested_w2(m_hat_prev, m_hat);
                for i in 0..n {
                    let r = self.v_given.row_index(&[
                        y_all[prev + i] as usize,
                        z_all[prev + i] as usize,
                        w1_prev[i] as usize,
                        w2_prev[i] as usize,
                    ]);
                    let row = self.v_given.row(r).unwrap_or(&self.uniform_v);
                    v_all.push(draw_index(rng, row) as u16);
                }
            }
        }

        let scored = (blocks - 1) * n;
        let mut vis = vec![0u32; self.target.len()];
        for i in 0..scored {
            let idx = u_all[i] as usize * self.vis_strides[0]
                + s_all[i] as usize * self.vis_strides[1]
                + z_all[i] as usize * self.vis_strides[2]
                + x_all[i] as usize * self.vis_strides[3]
                + y_all[i] as usize * self.vis_strides[4]
                + v_all[i] as usize * self.vis_strides[5];
            vis[idx] += 1;
        }
        let tv = 0.5
            * vis
                .iter()
                .zip(self.target.probs())
                .map(|(&c, &q)| (c as f64 / scored as f64 - q).abs())
                .sum::<f64>();

        TrialOutcome {
            tv,
            cover_ok,
            decode_status,
            m: m_enc as u64,
            m_hat: m_dec as u64,
        }
    }

    pub(crate) fn run_trial(&self, codebook: &Codebook, cfg: &SimConfig, t: u64) -> TrialOutcome {
        let mut rng = substream(cfg.seed, TAG_TRIAL, t, 0);
        let (u_all, s_all, z_all) = sample_source(cfg.blocks * cfg.n, &self.source, &mut rng)
            .expect("source law has three axes by construction");
        let acc = SliceSource { u: &u_all, s: &s_all };
        self.run_coded(&acc, &u_all, &s_all, &z_all, codebook, cfg, &mut rng)
    }
}

/// Runs the block-Markov scheme and returns the report plus every
/// trial record, in trial order.
pub fn simulate_block_markov_detailed(
    spec: &ScenarioSpec,
    aux: &AuxScheme,
    cfg: &SimConfig,
) -> Result<(SimReport, Vec<TrialOutcome>)> {
    cfg.validate()?;
    let engine = BlockMarkovEngine::build(spec, aux)?;
    let rate = engine.resolve_rate(cfg.rate_policy)?;
    let codebook = generate_nested_codebook(
        cfg.n,
        rate,
        engine.center_law(),
        engine.satellite_law(),
        cfg.seed,
    )?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| engine.run_trial(&codebook, cfg, t))
        .collect();
    let report = summarize(&outcomes, cfg, rate);
    Ok((report, outcomes))
}

/// Runs the block-Markov scheme and returns the aggregated report.
pub fn simulate_block_markov(
    spec: &ScenarioSpec,
    aux: &AuxScheme,
    cfg: &SimConfig,
) -> Result<SimReport> {
    simulate_block_markov_detailed(spec, aux, cfg).map(|(report, _)| report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Alphabet;
    use std::cell::Cell;

    /// Clean relay with a constant scheme: X copies U, V copies Y,
    /// singleton side information and auxiliaries.
    fn relay_spec() -> ScenarioSpec {
        let u = Alphabet::new(axis::U, 2);
        let s = Alphabet::new(axis::S, 1);
        let z = Alphabet::new(axis::Z, 1);
        let x = Alphabet::new(axis::X, 2);
        let y = Alphabet::new(axis::Y, 2);
        let v = Alphabet::new(axis::V, 2);
        let source =
            JointDistribution::new(vec![u.clone(), s.clone(), z.clone()], vec![0.5, 0.5]).unwrap();
        let channel =
            ConditionalKernel::deterministic(vec![x.clone(), s.clone()], vec![y.clone()], |g| {
                vec![g[0]]
            })
            .unwrap();
        let enc =
            ConditionalKernel::deterministic(vec![u.clone(), s.clone()], vec![x.clone()], |g| {
                vec![g[0]]
            })
            .unwrap();
        let dec = ConditionalKernel::deterministic(vec![u, s, z, x, y.clone()], vec![v], |g| {
            vec![g[4]]
        })
        .unwrap();
        ScenarioSpec::new(Scenario::CausalEncoding, source, channel, enc, dec).unwrap()
    }

    fn relay_aux(spec: &ScenarioSpec) -> AuxScheme {
        let w1 = Alphabet::new(axis::W1, 1);
        let w2 = Alphabet::new(axis::W2, 1);
        let prior = ConditionalKernel::new(vec![], vec![w1.clone()], vec![1.0]).unwrap();
        let description = ConditionalKernel::new(
            vec![spec.u_axis().clone(), spec.s_axis().clone(), w1.clone()],
            vec![w2.clone()],
            vec![1.0, 1.0],
        )
        .unwrap();
        let input = ConditionalKernel::deterministic(
            vec![spec.u_axis().clone(), spec.s_axis().clone(), w1.clone()],
            vec![spec.x_axis().clone()],
            |g| vec![g[0]],
        )
        .unwrap();
        let dec = ConditionalKernel::deterministic(
            vec![spec.y_axis().clone(), spec.z_axis().clone(), w1, w2],
            vec![spec.v_axis().clone()],
            |g| vec![g[0]],
        )
        .unwrap();
        AuxScheme::from_factors(
            Scenario::CausalEncoding,
            vec![
                ("codeword_prior".to_string(), prior),
                ("description".to_string(), description),
                ("channel_input".to_string(), input),
                ("codeword_decoder".to_string(), dec),
            ],
        )
        .unwrap()
    }

    /// Description scheme with real content: W1 is a fresh uniform
    /// input carrying the index, W2 describes U through a noisy flip,
    /// X transmits W1, V reproduces W2.
    fn description_spec() -> ScenarioSpec {
        let u = Alphabet::new(axis::U, 2);
        let s = Alphabet::new(axis::S, 1);
        let z = Alphabet::new(axis::Z, 1);
        let x = Alphabet::new(axis::X, 2);
        let y = Alphabet::new(axis::Y, 2);
        let v = Alphabet::new(axis::V, 2);
        let source =
            JointDistribution::new(vec![u.clone(), s.clone(), z.clone()], vec![0.5, 0.5]).unwrap();
        let channel =
            ConditionalKernel::deterministic(vec![x.clone(), s.clone()], vec![y.clone()], |g| {
                vec![g[0]]
            })
            .unwrap();
        // target input is a fresh coin, target output flips U with 0.3
        let enc = ConditionalKernel::new(
            vec![u.clone(), s.clone()],
            vec![x.clone()],
            vec![0.5, 0.5, 0.5, 0.5],
        )
        .unwrap();
        let mut dec_rows = Vec::new();
        for ui in 0..2usize {
            for _xi in 0..2 {
                for _yi in 0..2 {
                    if ui == 0 {
                        dec_rows.extend_from_slice(&[0.7, 0.3]);
                    } else {
                        dec_rows.extend_from_slice(&[0.3, 0.7]);
                    }
                }
            }
        }
        let dec =
            ConditionalKernel::new(vec![u, s, z, x, y.clone()], vec![v], dec_rows).unwrap();
        ScenarioSpec::new(Scenario::CausalEncoding, source, channel, enc, dec).unwrap()
    }

    fn description_aux(spec: &ScenarioSpec) -> AuxScheme {
        let w1 = Alphabet::new(axis::W1, 2);
        let w2 = Alphabet::new(axis::W2, 2);
        let prior = ConditionalKernel::new(vec![], vec![w1.clone()], vec![0.5, 0.5]).unwrap();
        let description = ConditionalKernel::new(
            vec![spec.u_axis().clone(), spec.s_axis().clone(), w1.clone()],
            vec![w2.clone()],
            vec![0.7, 0.3, 0.7, 0.3, 0.3, 0.7, 0.3, 0.7],
        )
        .unwrap();
        let input = ConditionalKernel::deterministic(
            vec![spec.u_axis().clone(), spec.s_axis().clone(), w1.clone()],
            vec![spec.x_axis().clone()],
            |g| vec![g[2]],
        )
        .unwrap();
        let dec = ConditionalKernel::deterministic(
            vec![spec.y_axis().clone(), spec.z_axis().clone(), w1, w2],
            vec![spec.v_axis().clone()],
            |g| vec![g[3]],
        )
        .unwrap();
        AuxScheme::from_factors(
            Scenario::CausalEncoding,
            vec![
                ("codeword_prior".to_string(), prior),
                ("description".to_string(), description),
                ("channel_input".to_string(), input),
                ("codeword_decoder".to_string(), dec),
            ],
        )
        .unwrap()
    }

    #[test]
    fn constant_relay_coordinates_across_blocks() {
        let spec = relay_spec();
        let aux = relay_aux(&spec);
        let cfg = SimConfig {
            n: 800,
            blocks: 3,
            trials: 40,
            seed: 21,
            rate_policy: RatePolicy::Explicit(0.0),
            ..SimConfig::default()
        };
        let report = simulate_block_markov(&spec, &aux, &cfg).unwrap();
        assert!(report.mean_tv < 0.06, "mean tv {}", report.mean_tv);
        assert_eq!(report.p_error_estimate, 0.0);
        assert_eq!(report.failure_breakdown.cover_failure, 0);
        assert_eq!(report.failure_breakdown.decode_none, 0);
    }

    #[test]
    fn midpoint_rejects_a_degenerate_window() {
        let spec = relay_spec();
        let aux = relay_aux(&spec);
        let cfg = SimConfig { n: 64, blocks: 2, trials: 5, ..SimConfig::default() };
        match simulate_block_markov(&spec, &aux, &cfg) {
            Err(Error::InfeasibleRate { lower, upper }) => {
                assert!(lower.abs() < 1e-9 && upper.abs() < 1e-9);
            }
            other => panic!("expected an infeasible rate window, got {other:?}"),
        }
    }

    #[test]
    fn midpoint_sits_inside_a_real_window() {
        let spec = description_spec();
        let aux = description_aux(&spec);
        let engine = BlockMarkovEngine::build(&spec, &aux).unwrap();
        let rate = engine.resolve_rate(RatePolicy::Midpoint).unwrap();
        let (lower, upper) = engine.rate_window;
        assert!(lower > 0.1 && lower < 0.13, "lower {lower}");
        assert!((upper - 1.0).abs() < 1e-9, "upper {upper}");
        assert!((rate - 0.5 * (lower + upper)).abs() < 1e-12);
    }

    #[test]
    fn oversized_codebooks_are_refused() {
        let spec = description_spec();
        let aux = description_aux(&spec);
        let cfg = SimConfig {
            n: 16,
            blocks: 2,
            trials: 1,
            rate_policy: RatePolicy::Explicit(2.0),
            ..SimConfig::default()
        };
        assert!(matches!(
            simulate_block_markov(&spec, &aux, &cfg),
            Err(Error::CodebookTooLarge { .. })
        ));
    }

    struct AuditSource<'a> {
        u: &'a [u16],
        s: &'a [u16],
        watermark: Cell<usize>,
    }

    impl SourceAccess for AuditSource<'_> {
        fn u(&self, i: usize) -> u16 {
            assert!(
                i <= self.watermark.get(),
                "encoder read u[{i}] past watermark {}",
                self.watermark.get()
            );
            self.u[i]
        }

        fn s(&self, i: usize) -> u16 {
            assert!(
                i <= self.watermark.get(),
                "encoder read s[{i}] past watermark {}",
                self.watermark.get()
            );
            self.s[i]
        }

        fn about_to_emit(&self, i: usize) {
            self.watermark.set(self.watermark.get().max(i));
        }
    }

    #[test]
    #[should_panic(expected = "past watermark")]
    fn the_audit_source_detects_lookahead() {
        let u = vec![0u16; 8];
        let s = vec![0u16; 8];
        let acc = AuditSource { u: &u, s: &s, watermark: Cell::new(0) };
        acc.about_to_emit(2);
        acc.u(5);
    }

    #[test]
    fn the_encoder_never_reads_ahead_of_its_emission_point() {
        let spec = description_spec();
        let aux = description_aux(&spec);
        let engine = BlockMarkovEngine::build(&spec, &aux).unwrap();
        let cfg = SimConfig {
            n: 12,
            blocks: 3,
            trials: 1,
            seed: 17,
            rate_policy: RatePolicy::Explicit(0.5),
            ..SimConfig::default()
        };
        let codebook = generate_nested_codebook(
            cfg.n,
            0.5,
            engine.center_law(),
            engine.satellite_law(),
            cfg.seed,
        )
        .unwrap();
        let mut rng = substream(cfg.seed, TAG_TRIAL, 0, 0);
        let (u_all, s_all, z_all) =
            sample_source(cfg.blocks * cfg.n, &spec.source().clone(), &mut rng).unwrap();
        let audited = AuditSource { u: &u_all, s: &s_all, watermark: Cell::new(0) };
        let via_audit =
            engine.run_coded(&audited, &u_all, &s_all, &z_all, &codebook, &cfg, &mut rng);

        // same streams through the plain access give the same outcome
        let mut rng = substream(cfg.seed, TAG_TRIAL, 0, 0);
        let (u2, s2, z2) =
            sample_source(cfg.blocks * cfg.n, &spec.source().clone(), &mut rng).unwrap();
        let plain = SliceSource { u: &u2, s: &s2 };
        let via_plain = engine.run_coded(&plain, &u2, &s2, &z2, &codebook, &cfg, &mut rng);
        assert_eq!(via_audit.tv, via_plain.tv);
        assert_eq!(via_audit.m, via_plain.m);
        assert_eq!(via_audit.m_hat, via_plain.m_hat);
    }

    #[test]
    fn reports_are_identical_across_thread_pools() {
        let spec = description_spec();
        let aux = description_aux(&spec);
        let cfg = SimConfig {
            n: 12,
            blocks: 3,
            trials: 30,
            seed: 5,
            rate_policy: RatePolicy::Explicit(0.4),
            ..SimConfig::default()
        };
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| simulate_block_markov_detailed(&spec, &aux, &cfg).unwrap())
        };
        let (ra, ta) = run(1);
        let (rb, tb) = run(4);
        assert_eq!(serde_json::to_string(&ra).unwrap(), serde_json::to_string(&rb).unwrap());
        assert_eq!(serde_json::to_string(&ta).unwrap(), serde_json::to_string(&tb).unwrap());
    }
}
