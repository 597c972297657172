//! Residuals measuring how far a joint is from its scenario's structure.
//!
//! Each scenario admits only joints that factor in a particular way:
//! the (U,S,Z) marginal must be the source, Y must come from the channel
//! acting on (X,S), and the auxiliaries must obey Markov chains that
//! encode who saw what. All conditions are reported as numeric residuals
//! (bits for chains, total variation for marginals, probability for tied
//! axes) so a caller can compare them against a tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::JointDistribution;

use super::{axis, Scenario, ScenarioSpec, FULL_AXES, VISIBLE_AXES};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StructuralResidual {
    pub condition: String,
    pub residual: f64,
}

fn named(condition: &str, residual: f64) -> StructuralResidual {
    StructuralResidual {
        condition: condition.to_string(),
        residual,
    }
}

pub fn max_residual(residuals: &[StructuralResidual]) -> f64 {
    residuals.iter().fold(0.0, |m, r| m.max(r.residual))
}

/// Probability that two equal-sized axes disagree.
fn tie_residual(joint: &JointDistribution, a: &str, b: &str) -> Result<f64> {
    let m = joint.marginalize(&[a, b])?;
    let sizes: Vec<usize> = m.axes().iter().map(|ax| ax.size).collect();
    if sizes[0] != sizes[1] {
        return Err(Error::AlphabetMismatch(format!(
            "tied axes {a} and {b} differ in size"
        )));
    }
    let mut agree = 0.0;
    for i in 0..sizes[0] {
        agree += m.get(&[i, i]);
    }
    Ok((1.0 - agree).max(0.0))
}

/// Chain and tie residuals implied by the scenario's factorization,
/// computable from the joint alone.
pub(crate) fn intrinsic_residuals(
    scenario: Scenario,
    joint: &JointDistribution,
) -> Result<Vec<StructuralResidual>> {
    use axis::*;
    let mr = |a: &[&str], b: &[&str], c: &[&str]| joint.markov_residual(a, b, c);
    let mut out = Vec::new();
    match scenario {
        Scenario::Noncausal => {
            out.push(named("markov_y", mr(&[Y], &[X, S], &[U, Z, W1, W2])?));
            out.push(named("markov_z", mr(&[Z], &[U, S], &[X, Y, W1, W2])?));
            out.push(named("markov_v", mr(&[V], &[Y, Z, W1, W2], &[U, S, X])?));
        }
        Scenario::CausalEncoding | Scenario::StrictlyCausalEncoding => {
            out.push(named("markov_y", mr(&[Y], &[X, S], &[U, Z, W1, W2])?));
            out.push(named("markov_z", mr(&[Z], &[U, S], &[X, Y, W1, W2])?));
            out.push(named("markov_v", mr(&[V], &[Y, Z, W1, W2], &[U, S, X])?));
            out.push(named(
                "codeword_independence",
                joint.mutual_information(&[U, S], &[W1])?,
            ));
            out.push(named("markov_x", mr(&[X], &[U, S, W1], &[W2])?));
            if scenario == Scenario::StrictlyCausalEncoding {
                out.push(named("tie_w1_x", tie_residual(joint, W1, X)?));
            }
        }
        Scenario::CausalDecoding => {
            out.push(named("markov_y", mr(&[Y], &[X, S], &[U, Z, W1, W2])?));
            out.push(named("markov_z", mr(&[Z], &[U, S], &[X, Y, W1, W2])?));
            out.push(named("markov_v", mr(&[V], &[Y, Z, W2], &[U, S, X, W1])?));
        }
        Scenario::StrictlyCausalDecoding => {
            out.push(named("markov_y", mr(&[Y], &[X, S], &[U, Z, W1, W2])?));
            out.push(named("markov_z", mr(&[Z], &[U, S], &[X, Y, W1, W2])?));
            out.push(named("tie_w2_v", tie_residual(joint, W2, V)?));
        }
        Scenario::PerfectChannel => {
            out.push(named("markov_z", mr(&[Z], &[U, S], &[X, W2])?));
            out.push(named("markov_v", mr(&[V], &[X, Z, W2], &[U, S])?));
            out.push(named("tie_w1_x", tie_residual(joint, W1, X)?));
            out.push(named("tie_y_x", tie_residual(joint, Y, X)?));
        }
        Scenario::Lossless => {
            out.push(named("markov_y", mr(&[Y], &[X, S], &[U, Z, W1])?));
            out.push(named("markov_z", mr(&[Z], &[U, S], &[X, Y, W1])?));
            out.push(named("tie_w2_u", tie_residual(joint, W2, U)?));
            out.push(named("tie_v_u", tie_residual(joint, V, U)?));
        }
        Scenario::Independent => {
            out.push(named("markov_w2", mr(&[Z], &[U], &[W2])?));
            out.push(named("markov_v", mr(&[V], &[Z, W2], &[U])?));
            out.push(named("markov_y", mr(&[Y], &[X, S], &[W1])?));
            out.push(named(
                "product_parts",
                joint.mutual_information(&[U, Z, W2, V], &[S, X, W1, Y])?,
            ));
        }
    }
    Ok(out)
}

/// All structural residuals of a candidate joint against a spec: source
/// marginal, channel rows, target visible marginal, then the scenario's
/// chains and ties.
pub fn check_structure(
    spec: &ScenarioSpec,
    joint: &JointDistribution,
) -> Result<Vec<StructuralResidual>> {
    let names: Vec<&str> = joint.axes().iter().map(|a| a.name.as_str()).collect();
    if names != FULL_AXES {
        return Err(Error::AlphabetMismatch(format!(
            "joint axes must be {FULL_AXES:?}, got {names:?}"
        )));
    }
    for (ax, want) in [
        (&joint.axes()[0], spec.u_axis()),
        (&joint.axes()[1], spec.s_axis()),
        (&joint.axes()[2], spec.z_axis()),
        (&joint.axes()[5], spec.x_axis()),
        (&joint.axes()[6], spec.y_axis()),
        (&joint.axes()[7], spec.v_axis()),
    ] {
        if *ax != *want {
            return Err(Error::AlphabetMismatch(format!(
                "joint axis {}({}) does not match spec's {}({})",
                ax.name, ax.size, want.name, want.size
            )));
        }
    }
    let mut out = Vec::new();
    let source_marginal = joint.marginalize(&[axis::U, axis::S, axis::Z])?;
    out.push(named(
        "source_marginal",
        source_marginal.total_variation(spec.source())?,
    ));
    let channel_rows = joint
        .marginalize(&[axis::X, axis::S, axis::Y])?
        .condition(&[axis::X, axis::S])?;
    out.push(named(
        "channel_rows",
        channel_rows.max_row_tv(spec.channel())?,
    ));
    let visible = joint.marginalize(&VISIBLE_AXES)?;
    out.push(named(
        "target_marginal",
        visible.total_variation(&spec.target_joint()?)?,
    ));
    out.extend(intrinsic_residuals(spec.scenario(), joint)?);
    Ok(out)
}
