//! Shared search-space machinery for both optimizer methods.
//!
//! A `SearchSpace` turns the free factors of a scenario into a list of
//! independent probability-simplex blocks. Three devices keep candidate
//! joints consistent with the target:
//!
//! * encoder rows are split into per-X fibers, so the induced X
//!   conditional equals the target encoder row exactly for every
//!   parameter choice;
//! * decoder slots are pinned to a lift of the target decoder whenever
//!   the target decoder depends only on axes the scheme's decoder can
//!   see, which is optimal because no scenario objective depends on the
//!   decoder slot;
//! * whatever cannot be pinned stays free, and the caller enforces the
//!   target marginal by rejection or penalty.

use crate::error::{Error, Result};
use crate::prob::{entropy_of_table, Alphabet, ConditionalKernel, JointDistribution};
use crate::scenario::{
    axis, factor_plan, AuxScheme, Scenario, ScenarioSpec, SlotSpec, P_S, P_U, P_V, P_W1, P_W2,
    P_X, P_Y, P_Z,
};

use super::Goal;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Conditioning events with target mass below this are unreachable; the
/// corresponding rows are pinned to uniform and never searched.
const MASS_CUT: f64 = 1e-12;

/// Tolerance when testing whether target rows agree, used by every
/// pinning decision.
const PIN_TOL: f64 = 1e-9;

/// One searchable simplex; the candidate writes `scale * h` at
/// `offset..offset+len` of the slot's table, for `h` in the simplex.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Block {
    pub slot: usize,
    pub offset: usize,
    pub len: usize,
    pub scale: f64,
}

pub(crate) struct SlotState {
    pub name: &'static str,
    pub given_axes: Vec<Alphabet>,
    pub out_axes: Vec<Alphabet>,
    pub rows: usize,
    pub cols: usize,
    /// Baseline table; block contents are overwritten per candidate,
    /// everything else (pinned rows, zero fibers) is final.
    pub template: Vec<f64>,
}

enum SlotKind {
    FiberEncoder,
    Decoder,
    Hidden,
    CausalInput,
    StrictInput,
}

fn classify(slot: &SlotSpec) -> SlotKind {
    match slot.name {
        "codeword_encoder" | "channel_encoder" => SlotKind::FiberEncoder,
        "codeword_decoder" | "source_decoder" => SlotKind::Decoder,
        "channel_input" => {
            if slot.given_pos.is_empty() {
                SlotKind::StrictInput
            } else {
                SlotKind::CausalInput
            }
        }
        _ => SlotKind::Hidden,
    }
}

/// Scratch tables reused across candidate evaluations.
pub(crate) struct EvalBuf {
    p: Vec<f64>,
    terms: Vec<Vec<f64>>,
    vis: Vec<f64>,
}

pub(crate) struct SearchSpace {
    scenario: Scenario,
    pub slots: Vec<SlotState>,
    pub blocks: Vec<Block>,
    /// Index of a free decoder slot that the ascent method repairs to
    /// the conditional expectation of the target decoder.
    pub repair_slot: Option<usize>,
    base: Vec<f64>,
    slot_cell: Vec<Vec<u32>>,
    term_cell: Vec<Vec<u32>>,
    term_sign: Vec<f64>,
    term_len: Vec<usize>,
    vis_cell: Vec<u32>,
    target_vis: Vec<f64>,
    v_zero: Vec<bool>,
    tgt_dec_cell: Vec<i32>,
    tgt_dec_rows: Vec<f64>,
}

/// Signed entropy groups whose sum is the scenario objective, stated on
/// canonical axis positions.
fn entropy_terms(scenario: Scenario, goal: Goal) -> Vec<(f64, Vec<usize>)> {
    let two_sided_upper = vec![
        (1.0, vec![P_Z, P_W2, P_Y]),
        (-1.0, vec![P_Z, P_W1, P_W2, P_Y]),
        (-1.0, vec![P_W2]),
        (-1.0, vec![P_U, P_S, P_W1]),
        (1.0, vec![P_U, P_S, P_W1, P_W2]),
        (1.0, vec![P_W1]),
    ];
    match (scenario, goal) {
        (Scenario::Noncausal, Goal::Achievability) => vec![
            (1.0, vec![P_Z, P_Y]),
            (-1.0, vec![P_Z, P_W1, P_W2, P_Y]),
            (-1.0, vec![P_U, P_S]),
            (1.0, vec![P_U, P_S, P_W1, P_W2]),
        ],
        (Scenario::Noncausal, Goal::Converse) => two_sided_upper,
        (Scenario::CausalDecoding, _) => vec![
            (1.0, vec![P_Z, P_W2, P_Y]),
            (-1.0, vec![P_Z, P_W1, P_W2, P_Y]),
            (-1.0, vec![P_W2]),
            (-1.0, vec![P_U, P_S]),
            (1.0, vec![P_U, P_S, P_W1, P_W2]),
        ],
        (Scenario::StrictlyCausalDecoding, _) => vec![
            (1.0, vec![P_Z, P_Y, P_V]),
            (-1.0, vec![P_Z, P_W1, P_Y, P_V]),
            (-1.0, vec![P_V]),
            (-1.0, vec![P_U, P_S]),
            (1.0, vec![P_U, P_S, P_W1, P_V]),
        ],
        (Scenario::CausalEncoding, _) => vec![
            (1.0, vec![P_Z, P_Y]),
            (-1.0, vec![P_Z, P_W1, P_W2, P_Y]),
            (1.0, vec![P_W1]),
            (-1.0, vec![P_U, P_S, P_W1]),
            (1.0, vec![P_U, P_S, P_W1, P_W2]),
        ],
        (Scenario::StrictlyCausalEncoding, _) => vec![
            (1.0, vec![P_Z, P_Y]),
            (-1.0, vec![P_Z, P_W2, P_X, P_Y]),
            (1.0, vec![P_X]),
            (-1.0, vec![P_U, P_S, P_X]),
            (1.0, vec![P_U, P_S, P_W2, P_X]),
        ],
        (Scenario::PerfectChannel, _) => vec![
            (1.0, vec![P_Z, P_X]),
            (-1.0, vec![P_Z, P_W2, P_X]),
            (-1.0, vec![P_U, P_S]),
            (1.0, vec![P_U, P_S, P_W2, P_X]),
        ],
        (Scenario::Lossless, _) => vec![
            (1.0, vec![P_Z, P_Y]),
            (-1.0, vec![P_U, P_Z, P_W1, P_Y]),
            (-1.0, vec![P_U, P_S]),
            (1.0, vec![P_U, P_S, P_W1]),
        ],
        (Scenario::Independent, _) => vec![
            (1.0, vec![P_Y]),
            (-1.0, vec![P_W1, P_Y]),
            (1.0, vec![P_Z]),
            (-1.0, vec![P_Z, P_W2]),
            (-1.0, vec![P_S]),
            (1.0, vec![P_S, P_W1]),
            (-1.0, vec![P_U]),
            (1.0, vec![P_U, P_W2]),
        ],
    }
}

fn strides_for(sizes: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }
    strides
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

impl SearchSpace {
    pub fn build(spec: &ScenarioSpec, goal: Goal, w1: usize, w2: usize) -> Result<SearchSpace> {
        let plan = factor_plan(spec, w1, w2)?;
        let target = spec.target_joint()?;
        let sizes: Vec<usize> = plan.axes.iter().map(|a| a.size).collect();

        let ns = sizes[P_S];
        let nz = sizes[P_Z];
        let nu = sizes[P_U];
        let source = spec.source().probs();
        let mut mass_us = vec![0.0f64; nu * ns];
        for u in 0..nu {
            for s in 0..ns {
                for z in 0..nz {
                    mass_us[u * ns + s] += source[(u * ns + s) * nz + z];
                }
            }
        }
        let mass_u: Vec<f64> = (0..nu).map(|u| (0..ns).map(|s| mass_us[u * ns + s]).sum()).collect();
        let mass_s: Vec<f64> = (0..ns).map(|s| (0..nu).map(|u| mass_us[u * ns + s]).sum()).collect();

        let mut slots = Vec::new();
        let mut blocks = Vec::new();
        let mut repair_slot = None;
        let mut strict_input_row: Option<Vec<f64>> = None;
        for (si, sspec) in plan.slots.iter().enumerate() {
            let given_axes = sspec.given_axes(&plan.axes);
            let out_axes = sspec.out_axes(&plan.axes);
            let rows: usize = given_axes.iter().map(|a| a.size).product();
            let cols: usize = out_axes.iter().map(|a| a.size).product();
            let mut template = vec![0.0f64; rows * cols];
            let uniform_row = |template: &mut Vec<f64>, r: usize| {
                for c in 0..cols {
                    template[r * cols + c] = 1.0 / cols as f64;
                }
            };
            match classify(sspec) {
                SlotKind::FiberEncoder => {
                    debug_assert_eq!(out_axes[0].name, axis::X);
                    let x_size = out_axes[0].size;
                    let hlen = cols / x_size;
                    let enc = spec.target_encoder();
                    for r in 0..rows {
                        let (reach, trow) = if sspec.given_pos == [P_U, P_S] {
                            (mass_us[r], enc.row(r))
                        } else {
                            // channel encoder sees S only; the target
                            // encoder row is constant in U by validation
                            let s = r;
                            let row = (0..nu).find_map(|u| enc.row(enc.row_index(&[u, s])));
                            (mass_s[s], row)
                        };
                        match (reach > MASS_CUT, trow) {
                            (true, Some(trow)) => {
                                for x in 0..x_size {
                                    let t = trow[x];
                                    let off = r * cols + x * hlen;
                                    for j in 0..hlen {
                                        template[off + j] = t / hlen as f64;
                                    }
                                    if t > MASS_CUT {
                                        blocks.push(Block { slot: si, offset: off, len: hlen, scale: t });
                                    }
                                }
                            }
                            _ => uniform_row(&mut template, r),
                        }
                    }
                }
                SlotKind::Decoder => {
                    match lift_decoder(spec, sspec, &sizes, rows, cols, &target)? {
                        Some(lift) => template = lift,
                        None => {
                            repair_slot = Some(si);
                            for r in 0..rows {
                                uniform_row(&mut template, r);
                                blocks.push(Block { slot: si, offset: r * cols, len: cols, scale: 1.0 });
                            }
                        }
                    }
                }
                SlotKind::Hidden => {
                    let enc = spec.target_encoder();
                    for r in 0..rows {
                        let reachable = match sspec.given_pos.as_slice() {
                            [] => true,
                            [P_U] => mass_u[r] > MASS_CUT,
                            [P_U, P_S, P_X] => {
                                let x = r % sizes[P_X];
                                let us = r / sizes[P_X];
                                let x_mass = match spec.scenario() {
                                    Scenario::StrictlyCausalEncoding => strict_input_row
                                        .as_ref()
                                        .map(|q| q[x])
                                        .unwrap_or(1.0),
                                    _ => enc.row(us).map(|t| t[x]).unwrap_or(0.0),
                                };
                                mass_us[us] * x_mass > MASS_CUT
                            }
                            _ => {
                                // given includes an auxiliary; support is
                                // candidate-dependent, search every row
                                let us = r / sizes[P_W1];
                                sspec.given_pos.as_slice() != [P_U, P_S, P_W1]
                                    || mass_us[us] > MASS_CUT
                            }
                        };
                        uniform_row(&mut template, r);
                        if reachable {
                            blocks.push(Block { slot: si, offset: r * cols, len: cols, scale: 1.0 });
                        }
                    }
                }
                SlotKind::CausalInput => {
                    let enc = spec.target_encoder();
                    let nw1 = sizes[P_W1];
                    let deterministic = (0..nu * ns).all(|us| {
                        mass_us[us] <= MASS_CUT
                            || enc
                                .row(us)
                                .map(|t| t.iter().cloned().fold(0.0, f64::max) >= 1.0 - PIN_TOL)
                                .unwrap_or(false)
                    });
                    for r in 0..rows {
                        let us = r / nw1;
                        if deterministic {
                            match enc.row(us) {
                                Some(t) => template[r * cols..(r + 1) * cols].copy_from_slice(t),
                                None => uniform_row(&mut template, r),
                            }
                        } else {
                            uniform_row(&mut template, r);
                            if mass_us[us] > MASS_CUT {
                                blocks.push(Block { slot: si, offset: r * cols, len: cols, scale: 1.0 });
                            }
                        }
                    }
                }
                SlotKind::StrictInput => {
                    let enc = spec.target_encoder();
                    let mut shared: Option<Vec<f64>> = None;
                    let mut constant = true;
                    for us in 0..nu * ns {
                        if mass_us[us] <= MASS_CUT {
                            continue;
                        }
                        match (enc.row(us), &shared) {
                            (Some(t), None) => shared = Some(t.to_vec()),
                            (Some(t), Some(first)) => {
                                if max_abs_diff(t, first) > PIN_TOL {
                                    constant = false;
                                }
                            }
                            (None, _) => constant = false,
                        }
                    }
                    match (constant, shared) {
                        (true, Some(row)) => {
                            template.copy_from_slice(&row);
                            strict_input_row = Some(row);
                        }
                        _ => {
                            // the channel input is chosen blind; a target
                            // that varies with (U,S) cannot be matched and
                            // will surface as an infeasible-target error
                            uniform_row(&mut template, 0);
                            blocks.push(Block { slot: si, offset: 0, len: cols, scale: 1.0 });
                        }
                    }
                }
            }
            slots.push(SlotState { name: sspec.name, given_axes, out_axes, rows, cols, template });
        }

        // evaluation precompute over nonzero-base cells
        let terms = entropy_terms(spec.scenario(), goal);
        let term_sign: Vec<f64> = terms.iter().map(|(s, _)| *s).collect();
        let term_strides: Vec<(Vec<usize>, Vec<usize>)> = terms
            .iter()
            .map(|(_, pos)| {
                let tsizes: Vec<usize> = pos.iter().map(|&p| sizes[p]).collect();
                (pos.clone(), strides_for(&tsizes))
            })
            .collect();
        let term_len: Vec<usize> = terms
            .iter()
            .map(|(_, pos)| pos.iter().map(|&p| sizes[p]).product())
            .collect();
        let vis_pos = [P_U, P_S, P_Z, P_X, P_Y, P_V];
        let vis_sizes: Vec<usize> = vis_pos.iter().map(|&p| sizes[p]).collect();
        let vis_strides = strides_for(&vis_sizes);
        let slot_layout: Vec<(Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>)> = plan
            .slots
            .iter()
            .map(|s| {
                let gsz: Vec<usize> = s.given_pos.iter().map(|&p| sizes[p]).collect();
                let osz: Vec<usize> = s.out_pos.iter().map(|&p| sizes[p]).collect();
                (s.given_pos.clone(), strides_for(&gsz), s.out_pos.clone(), strides_for(&osz))
            })
            .collect();
        let dec = spec.target_decoder();
        let dec_sizes = [sizes[P_U], sizes[P_S], sizes[P_Z], sizes[P_X], sizes[P_Y]];
        let dec_strides = strides_for(&dec_sizes);
        let want_dec = repair_slot.is_some();

        let total: usize = sizes.iter().product();
        let mut base = Vec::new();
        let mut slot_cell: Vec<Vec<u32>> = vec![Vec::new(); slots.len()];
        let mut term_cell: Vec<Vec<u32>> = vec![Vec::new(); terms.len()];
        let mut vis_cell = Vec::new();
        let mut v_zero = Vec::new();
        let mut tgt_dec_cell = Vec::new();
        let mut idx = vec![0usize; sizes.len()];
        for flat in 0..total {
            let _ = flat;
            let mut b = 1.0;
            for f in &plan.fixed {
                let mut m = 0usize;
                for (ax, &i) in idx.iter().enumerate() {
                    m += f.contrib()[ax] * i;
                }
                b *= f.table()[m];
                if b == 0.0 {
                    break;
                }
            }
            if b != 0.0 {
                base.push(b);
                for (s, (gpos, gstr, opos, ostr)) in slot_layout.iter().enumerate() {
                    let mut row = 0usize;
                    for (g, st) in gpos.iter().zip(gstr) {
                        row += idx[*g] * st;
                    }
                    let mut col = 0usize;
                    for (o, st) in opos.iter().zip(ostr) {
                        col += idx[*o] * st;
                    }
                    slot_cell[s].push((row * slots[s].cols + col) as u32);
                }
                for (t, (pos, tstr)) in term_strides.iter().enumerate() {
                    let mut g = 0usize;
                    for (p, st) in pos.iter().zip(tstr) {
                        g += idx[*p] * st;
                    }
                    term_cell[t].push(g as u32);
                }
                let mut vi = 0usize;
                for (p, st) in vis_pos.iter().zip(&vis_strides) {
                    vi += idx[*p] * st;
                }
                vis_cell.push(vi as u32);
                v_zero.push(idx[P_V] == 0);
                if want_dec {
                    let coords = [idx[P_U], idx[P_S], idx[P_Z], idx[P_X], idx[P_Y]];
                    let mut r = 0usize;
                    for (c, st) in coords.iter().zip(&dec_strides) {
                        r += c * st;
                    }
                    tgt_dec_cell.push(if dec.is_row_defined(r) { r as i32 } else { -1 });
                }
            }
            for ax in (0..sizes.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < sizes[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }

        Ok(SearchSpace {
            scenario: spec.scenario(),
            slots,
            blocks,
            repair_slot,
            base,
            slot_cell,
            term_cell,
            term_sign,
            term_len,
            vis_cell,
            target_vis: target.probs().to_vec(),
            v_zero,
            tgt_dec_cell,
            tgt_dec_rows: dec.probs().to_vec(),
        })
    }

    pub fn template_tables(&self) -> Vec<Vec<f64>> {
        self.slots.iter().map(|s| s.template.clone()).collect()
    }

    pub fn write_block(&self, tables: &mut [Vec<f64>], bi: usize, point: &[f64]) {
        let b = self.blocks[bi];
        let dst = &mut tables[b.slot][b.offset..b.offset + b.len];
        for (d, h) in dst.iter_mut().zip(point) {
            *d = b.scale * h;
        }
    }

    pub fn buf(&self) -> EvalBuf {
        EvalBuf {
            p: vec![0.0; self.base.len()],
            terms: self.term_len.iter().map(|&n| vec![0.0; n]).collect(),
            vis: vec![0.0; self.target_vis.len()],
        }
    }

    fn accumulate(&self, tables: &[Vec<f64>], buf: &mut EvalBuf) {
        for t in buf.terms.iter_mut() {
            t.iter_mut().for_each(|x| *x = 0.0);
        }
        buf.vis.iter_mut().for_each(|x| *x = 0.0);
        for c in 0..self.base.len() {
            let mut p = self.base[c];
            for (s, tab) in tables.iter().enumerate() {
                p *= tab[self.slot_cell[s][c] as usize];
                if p == 0.0 {
                    break;
                }
            }
            buf.p[c] = p;
            if p == 0.0 {
                continue;
            }
            for (t, acc) in buf.terms.iter_mut().enumerate() {
                acc[self.term_cell[t][c] as usize] += p;
            }
            buf.vis[self.vis_cell[c] as usize] += p;
        }
    }

    fn finish(&self, buf: &EvalBuf) -> (f64, f64) {
        let mut value = 0.0;
        for (t, acc) in buf.terms.iter().enumerate() {
            value += self.term_sign[t] * entropy_of_table(acc);
        }
        let tv = 0.5
            * buf
                .vis
                .iter()
                .zip(&self.target_vis)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        (value, tv)
    }

    /// Objective value and target total variation for fully
    /// materialized slot tables.
    pub fn evaluate(&self, tables: &[Vec<f64>], buf: &mut EvalBuf) -> (f64, f64) {
        self.accumulate(tables, buf);
        self.finish(buf)
    }

    /// Evaluate and fill the per-block gradient of
    /// `value - penalty * tv` with respect to each block's simplex
    /// coordinates. Returns (value, tv).
    pub fn gradient(
        &self,
        tables: &[Vec<f64>],
        penalty: f64,
        buf: &mut EvalBuf,
        grads: &mut [Vec<f64>],
    ) -> (f64, f64) {
        self.accumulate(tables, buf);
        let (value, tv) = self.finish(buf);
        let searched: Vec<bool> = {
            let mut v = vec![false; self.slots.len()];
            for b in &self.blocks {
                v[b.slot] = true;
            }
            v
        };
        let mut gt: Vec<Vec<f64>> = self
            .slots
            .iter()
            .enumerate()
            .map(|(s, st)| {
                if searched[s] {
                    vec![0.0; st.rows * st.cols]
                } else {
                    Vec::new()
                }
            })
            .collect();
        for c in 0..self.base.len() {
            let p = buf.p[c];
            if p == 0.0 {
                continue;
            }
            let mut score = 0.0;
            for (t, acc) in buf.terms.iter().enumerate() {
                let m = acc[self.term_cell[t][c] as usize];
                score += self.term_sign[t] * (-m.log2() - LOG2_E);
            }
            if penalty > 0.0 {
                let d = buf.vis[self.vis_cell[c] as usize]
                    - self.target_vis[self.vis_cell[c] as usize];
                if d > 0.0 {
                    score -= 0.5 * penalty;
                } else if d < 0.0 {
                    score += 0.5 * penalty;
                }
            }
            for (s, tab) in tables.iter().enumerate() {
                if !searched[s] {
                    continue;
                }
                let i = self.slot_cell[s][c] as usize;
                gt[s][i] += p / tab[i] * score;
            }
        }
        for (bi, b) in self.blocks.iter().enumerate() {
            for j in 0..b.len {
                grads[bi][j] = b.scale * gt[b.slot][b.offset + j];
            }
        }
        (value, tv)
    }

    /// Replace a free decoder by the conditional expectation of the
    /// target decoder under the current encoder-side factors. This is
    /// the consistency-optimal decoder for the candidate and never
    /// changes the objective, which is decoder-free in every scenario
    /// that has a decoder slot.
    pub fn repair(&self, tables: &mut [Vec<f64>]) {
        let Some(ds) = self.repair_slot else {
            return;
        };
        let cols = self.slots[ds].cols;
        let rows = self.slots[ds].rows;
        let mut acc = vec![0.0f64; rows * cols];
        for c in 0..self.base.len() {
            if !self.v_zero[c] {
                continue;
            }
            let mut w = self.base[c];
            for (s, tab) in tables.iter().enumerate() {
                if s == ds {
                    continue;
                }
                w *= tab[self.slot_cell[s][c] as usize];
                if w == 0.0 {
                    break;
                }
            }
            if w == 0.0 {
                continue;
            }
            let row = self.slot_cell[ds][c] as usize / cols;
            let tr = self.tgt_dec_cell[c];
            if tr >= 0 {
                let off = tr as usize * cols;
                for v in 0..cols {
                    acc[row * cols + v] += w * self.tgt_dec_rows[off + v];
                }
            } else {
                for v in 0..cols {
                    acc[row * cols + v] += w / cols as f64;
                }
            }
        }
        for r in 0..rows {
            let tot: f64 = acc[r * cols..(r + 1) * cols].iter().sum();
            let dst = &mut tables[ds][r * cols..(r + 1) * cols];
            if tot > 0.0 {
                for (d, a) in dst.iter_mut().zip(&acc[r * cols..(r + 1) * cols]) {
                    *d = a / tot;
                }
            } else {
                dst.iter_mut().for_each(|d| *d = 1.0 / cols as f64);
            }
        }
    }

    pub fn to_scheme(&self, tables: &[Vec<f64>]) -> Result<AuxScheme> {
        let mut factors = Vec::new();
        for (st, tab) in self.slots.iter().zip(tables) {
            let kernel = ConditionalKernel::new(
                st.given_axes.clone(),
                st.out_axes.clone(),
                tab.clone(),
            )?;
            factors.push((st.name.to_string(), kernel));
        }
        AuxScheme::from_factors(self.scenario, factors)
    }

    /// Worst-case objective change when every searched block moves to
    /// its nearest lattice point at step 1/k: a joint total-variation
    /// budget per slot, pushed through a continuity bound per entropy
    /// term.
    pub fn value_quantization_bound(&self, k: usize) -> f64 {
        let mut slot_tv = vec![0.0f64; self.slots.len()];
        for (s, st) in self.slots.iter().enumerate() {
            let mut row_tv = vec![0.0f64; st.rows];
            for b in &self.blocks {
                if b.slot == s {
                    let row = b.offset / st.cols;
                    row_tv[row] += b.scale * b.len as f64 / (2.0 * k as f64);
                }
            }
            slot_tv[s] = row_tv.iter().cloned().fold(0.0, f64::max);
        }
        let t: f64 = slot_tv.iter().sum();
        let h2 = |x: f64| -> f64 {
            if x <= 0.0 || x >= 1.0 {
                0.0
            } else {
                -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
            }
        };
        let mut bound = 0.0;
        for &n in &self.term_len {
            let full = (n as f64).log2().max(1.0);
            let fannes = t * ((n.saturating_sub(1)).max(2) as f64).log2() + h2(t.min(0.5));
            bound += fannes.min(full);
        }
        bound
    }

    pub fn infeasible(&self, best_tv: f64) -> Error {
        Error::InfeasibleTarget { best_tv }
    }
}

/// Lift of the target decoder onto a decoder slot, when the target rows
/// depend only on the visible axes the slot conditions on. Returns None
/// when the target genuinely uses hidden information.
fn lift_decoder(
    spec: &ScenarioSpec,
    sspec: &SlotSpec,
    sizes: &[usize],
    rows: usize,
    cols: usize,
    target: &JointDistribution,
) -> Result<Option<Vec<f64>>> {
    let tgt_slot_of = |p: usize| -> Option<usize> {
        match p {
            P_U => Some(0),
            P_S => Some(1),
            P_Z => Some(2),
            P_X => Some(3),
            P_Y => Some(4),
            _ => None,
        }
    };
    // visible members of the slot's conditioning set, with their index
    // in the slot given order and in the target decoder given order
    let vis: Vec<(usize, usize)> = sspec
        .given_pos
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| tgt_slot_of(p).map(|t| (i, t)))
        .collect();
    let dec = spec.target_decoder();
    let dec_sizes = [sizes[P_U], sizes[P_S], sizes[P_Z], sizes[P_X], sizes[P_Y]];
    let dec_strides = strides_for(&dec_sizes);
    let support = target.marginalize(&[axis::U, axis::S, axis::Z, axis::X, axis::Y])?;
    let mass = support.probs();

    let key_sizes: Vec<usize> = vis.iter().map(|&(_, t)| dec_sizes[t]).collect();
    let key_strides = strides_for(&key_sizes);
    let nkeys: usize = key_sizes.iter().product::<usize>().max(1);
    let mut group: Vec<Option<Vec<f64>>> = vec![None; nkeys];

    let mut coords = vec![0usize; 5];
    for r in 0..dec.rows() {
        let mut rem = r;
        for (i, st) in dec_strides.iter().enumerate() {
            coords[i] = rem / st;
            rem %= st;
        }
        if mass[r] <= MASS_CUT {
            continue;
        }
        let Some(row) = dec.row(r) else {
            return Ok(None);
        };
        let mut key = 0usize;
        for ((_, t), st) in vis.iter().zip(&key_strides) {
            key += coords[*t] * st;
        }
        match &group[key] {
            None => group[key] = Some(row.to_vec()),
            Some(first) => {
                if max_abs_diff(first, row) > PIN_TOL {
                    return Ok(None);
                }
            }
        }
    }

    let gsizes: Vec<usize> = sspec.given_pos.iter().map(|&p| sizes[p]).collect();
    let gstrides = strides_for(&gsizes);
    let mut template = vec![0.0f64; rows * cols];
    for r in 0..rows {
        let mut key = 0usize;
        for ((i, _), st) in vis.iter().zip(&key_strides) {
            let c = (r / gstrides[*i]) % gsizes[*i];
            key += c * st;
        }
        match &group[key] {
            Some(row) => template[r * cols..(r + 1) * cols].copy_from_slice(row),
            None => {
                for c in 0..cols {
                    template[r * cols + c] = 1.0 / cols as f64;
                }
            }
        }
    }
    Ok(Some(template))
}
