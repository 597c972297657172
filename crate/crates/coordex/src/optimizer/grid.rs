//! Exhaustive search over a simplex lattice.
//!
//! Every searchable block ranges over the points c/k of its simplex,
//! where c runs over compositions of k. Candidates whose visible
//! marginal misses the target are rejected; the winner among the rest
//! is exact on the lattice and certified up to the quantization width
//! reported on the result.

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::{OptimizationResult, OptimizerConfig, SearchSpace, GRID_CANDIDATE_CAP};

const CHUNK: u64 = 4096;

fn binom(n: u64, r: u64) -> u128 {
    let r = r.min(n - r);
    let mut c: u128 = 1;
    for i in 0..r {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// Compositions of k into d parts, ascending lexicographic order, as
/// simplex points c/k.
fn lattice_points(k: usize, d: usize) -> Vec<Vec<f64>> {
    fn rec(k_left: usize, i: usize, c: &mut [usize], k: usize, out: &mut Vec<Vec<f64>>) {
        if i + 1 == c.len() {
            c[i] = k_left;
            out.push(c.iter().map(|&v| v as f64 / k as f64).collect());
            return;
        }
        for v in 0..=k_left {
            c[i] = v;
            rec(k_left - v, i + 1, c, k, out);
        }
    }
    let mut out = Vec::new();
    let mut c = vec![0usize; d];
    rec(k, 0, &mut c, k, &mut out);
    out
}

struct Best {
    value: f64,
    idx: u64,
    tv: f64,
    tables: Vec<Vec<f64>>,
}

struct ScanOut {
    best: Option<Best>,
    min_tv: f64,
}

fn better(a: &Best, b: &Best) -> bool {
    a.value > b.value || (a.value == b.value && a.idx < b.idx)
}

fn merge(a: ScanOut, b: ScanOut) -> ScanOut {
    let best = match (a.best, b.best) {
        (Some(x), Some(y)) => Some(if better(&x, &y) { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    };
    ScanOut { best, min_tv: a.min_tv.min(b.min_tv) }
}

fn scan(
    space: &SearchSpace,
    lattices: &[Vec<Vec<f64>>],
    tolerance: f64,
    from: u64,
    to: u64,
) -> ScanOut {
    let nb = lattices.len();
    let mut digits = vec![0usize; nb];
    let mut rem = from;
    for b in (0..nb).rev() {
        let len = lattices[b].len() as u64;
        digits[b] = (rem % len) as usize;
        rem /= len;
    }
    let mut tables = space.template_tables();
    for b in 0..nb {
        space.write_block(&mut tables, b, &lattices[b][digits[b]]);
    }
    let mut buf = space.buf();
    let mut out = ScanOut { best: None, min_tv: f64::INFINITY };
    for idx in from..to {
        let (value, tv) = space.evaluate(&tables, &mut buf);
        if tv < out.min_tv {
            out.min_tv = tv;
        }
        if tv <= tolerance {
            let cand_better = match &out.best {
                Some(b) => value > b.value,
                None => true,
            };
            if cand_better {
                out.best = Some(Best { value, idx, tv, tables: tables.clone() });
            }
        }
        if idx + 1 < to {
            // advance the least-significant block, rewriting every
            // block whose digit changed
            for b in (0..nb).rev() {
                digits[b] += 1;
                if digits[b] < lattices[b].len() {
                    space.write_block(&mut tables, b, &lattices[b][digits[b]]);
                    break;
                }
                digits[b] = 0;
                space.write_block(&mut tables, b, &lattices[b][digits[b]]);
            }
        }
    }
    out
}

pub(crate) fn run(space: &SearchSpace, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    let k = (1.0 / cfg.grid_resolution).round().max(1.0) as usize;
    let mut candidates: u128 = 1;
    for b in &space.blocks {
        candidates = candidates.saturating_mul(binom((k + b.len - 1) as u64, (b.len - 1) as u64));
        if candidates > GRID_CANDIDATE_CAP as u128 {
            return Err(Error::GridTooLarge { candidates, cap: GRID_CANDIDATE_CAP });
        }
    }
    let n = candidates as u64;
    let lattices: Vec<Vec<Vec<f64>>> = space
        .blocks
        .iter()
        .map(|b| lattice_points(k, b.len))
        .collect();
    let chunks = n.div_ceil(CHUNK);
    let merged = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let from = ci * CHUNK;
            let to = (from + CHUNK).min(n);
            scan(space, &lattices, cfg.tolerance, from, to)
        })
        .reduce(
            || ScanOut { best: None, min_tv: f64::INFINITY },
            merge,
        );
    match merged.best {
        Some(b) => Ok(OptimizationResult {
            best_value: b.value,
            best_aux: space.to_scheme(&b.tables)?,
            iterations_used: n,
            certified: true,
            quantization_bound: space.value_quantization_bound(k),
            target_deviation: b.tv,
            budget_exhausted: false,
            underflow_repairs: 0,
            evaluated: n,
        }),
        None => Err(space.infeasible(merged.min_tv)),
    }
}
