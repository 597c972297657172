//! Search for the best auxiliary scheme of a scenario.
//!
//! The free factors of a scheme are parameterized so that the visible
//! marginal of the assembled joint reproduces the spec's target joint:
//! encoder rows are split into per-output fibers that pin the X marginal
//! exactly, decoders are lifted from the target when the target decoder
//! only depends on what the scheme's decoder can see, and anything left
//! over is handled by rejection (grid) or a penalty (ascent). Two
//! methods are offered: exhaustive enumeration over a simplex lattice,
//! certified up to a quantization width, and multiplicative gradient
//! ascent from random restarts.

mod ascent;
mod grid;
mod space;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{AuxScheme, Scenario, ScenarioSpec};

pub(crate) use space::SearchSpace;

/// Default cap on auxiliary alphabet sizes when the config leaves them
/// unset; the theoretical bounds are far too large to search.
const DEFAULT_AUX_CAP: usize = 4;

/// Hard cap on grid candidates. Sized so a binary instance with one
/// free encoder row and both auxiliaries binary still enumerates at
/// resolution 0.25; anything bigger is refused rather than left to
/// run for hours.
const GRID_CANDIDATE_CAP: u64 = 100_000_000;

/// Penalty weight, in bits per unit of total variation, applied during
/// ascent when a candidate's visible marginal drifts off the target.
const TARGET_PENALTY: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    Grid,
    Ascent,
}

/// Which scenario bound to maximize. The lower bound is the default;
/// the upper bound differs from it only in the general two-sided case.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Goal {
    Achievability,
    Converse,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub method: SearchMethod,
    /// Auxiliary alphabet sizes; `None` means the smaller of the
    /// theoretical bound and a small practical cap. Scenarios that tie
    /// an auxiliary to a system variable ignore the corresponding size.
    pub w1_size: Option<usize>,
    pub w2_size: Option<usize>,
    /// Lattice step for the grid method, in (0, 1].
    pub grid_resolution: f64,
    pub restarts: u32,
    pub max_iters: u32,
    pub step_size: f64,
    pub seed: u64,
    /// Total-variation tolerance for reproducing the target joint.
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> OptimizerConfig {
        OptimizerConfig {
            method: SearchMethod::Ascent,
            w1_size: None,
            w2_size: None,
            grid_resolution: 0.2,
            restarts: 32,
            max_iters: 400,
            step_size: 0.5,
            seed: 0,
            tolerance: 1e-6,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.w1_size == Some(0) || self.w2_size == Some(0) {
            return Err(Error::InvalidConfig(
                "auxiliary alphabet sizes must be at least 1".to_string(),
            ));
        }
        if !(self.grid_resolution > 0.0 && self.grid_resolution <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "grid_resolution must lie in (0, 1], got {}",
                self.grid_resolution
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".to_string()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".to_string()));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "step_size must be positive, got {}",
                self.step_size
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizationResult {
    /// Best objective value found, in bits; a lower bound on the true
    /// maximum at the searched alphabet sizes.
    pub best_value: f64,
    pub best_aux: AuxScheme,
    pub iterations_used: u64,
    /// True only for a completed exhaustive grid; the value is then
    /// within `quantization_bound` of the best lattice-consistent
    /// scheme's neighborhood optimum.
    pub certified: bool,
    /// Worst-case objective change under rounding every free factor to
    /// the searched lattice; zero for the ascent method.
    pub quantization_bound: f64,
    /// Total variation between the winner's visible marginal and the
    /// target joint.
    pub target_deviation: f64,
    /// Set when an ascent restart stopped at `max_iters` while still
    /// improving.
    pub budget_exhausted: bool,
    /// Count of multiplicative updates that had to be re-jittered after
    /// numerical underflow.
    pub underflow_repairs: u64,
    /// Candidate evaluations performed.
    pub evaluated: u64,
}

/// Visible alphabet sizes of a scenario, the inputs to the auxiliary
/// cardinality bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VisibleSizes {
    pub u: usize,
    pub s: usize,
    pub z: usize,
    pub x: usize,
    pub y: usize,
    pub v: usize,
}

impl VisibleSizes {
    pub fn of(spec: &ScenarioSpec) -> VisibleSizes {
        VisibleSizes {
            u: spec.u_axis().size,
            s: spec.s_axis().size,
            z: spec.z_axis().size,
            x: spec.x_axis().size,
            y: spec.y_axis().size,
            v: spec.v_axis().size,
        }
    }
}

/// Alphabet sizes beyond which enlarging W1 or W2 cannot increase any
/// scenario objective. Tied auxiliaries report the size of the variable
/// they are tied to; the perfect-channel description admits a much
/// smaller support-based bound that skips the collapsed channel output.
pub fn cardinality_bound(scenario: Scenario, sizes: VisibleSizes) -> (usize, usize) {
    let b = sizes.u * sizes.s * sizes.z * sizes.x * sizes.y * sizes.v;
    let general = (b + 1) * (b + 2);
    match scenario {
        Scenario::PerfectChannel => {
            let b_support = sizes.u * sizes.s * sizes.z * sizes.x * sizes.v;
            (sizes.x, b_support + 1)
        }
        Scenario::StrictlyCausalEncoding => (sizes.x, general),
        Scenario::Lossless => (general, sizes.u),
        Scenario::StrictlyCausalDecoding => (general, sizes.v),
        _ => (general, general),
    }
}

fn effective_sizes(spec: &ScenarioSpec, cfg: &OptimizerConfig) -> (usize, usize) {
    let (b1, b2) = cardinality_bound(spec.scenario(), VisibleSizes::of(spec));
    let pick = |requested: Option<usize>, bound: usize| -> usize {
        requested.unwrap_or(DEFAULT_AUX_CAP.min(bound)).min(bound).max(1)
    };
    (pick(cfg.w1_size, b1), pick(cfg.w2_size, b2))
}

fn run(spec: &ScenarioSpec, cfg: &OptimizerConfig, goal: Goal) -> Result<OptimizationResult> {
    cfg.validate()?;
    let (w1, w2) = effective_sizes(spec, cfg);
    let space = SearchSpace::build(spec, goal, w1, w2)?;
    match cfg.method {
        SearchMethod::Grid => grid::run(&space, cfg),
        SearchMethod::Ascent => ascent::run(&space, cfg),
    }
}

/// Maximize the scenario's achievability objective over auxiliary
/// schemes that reproduce the target joint.
pub fn optimize(spec: &ScenarioSpec, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    run(spec, cfg, Goal::Achievability)
}

/// Maximize the matching impossibility bound; identical to `optimize`
/// except in the general two-sided scenario, where the two bounds
/// differ.
pub fn optimize_converse(spec: &ScenarioSpec, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    run(spec, cfg, Goal::Converse)
}
