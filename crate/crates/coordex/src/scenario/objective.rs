//! Information objectives deciding whether a target behavior is within
//! reach of some coding scheme.
//!
//! Each scenario has an achievability value in bits: nonnegative means a
//! scheme with these auxiliaries coordinates the network, and the excess
//! is spendable on an extra message. The noncausal scenario also has a
//! separate converse bound; everywhere else the two coincide.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{strides_of, Alphabet, JointDistribution};

use super::structure::{check_structure, intrinsic_residuals, max_residual, StructuralResidual};
use super::{assemble_joint, axis, AuxScheme, Scenario, ScenarioSpec};

/// Default ceiling on structural residuals for a certified verdict.
pub const STRUCTURE_TOL: f64 = 1e-6;

/// Objective values within this band of zero are treated as undecided.
pub const FEASIBILITY_TOL: f64 = 1e-6;

const SEPARATION_SLACK: f64 = 1e-9;

fn require_structure(scenario: Scenario, joint: &JointDistribution) -> Result<()> {
    for r in intrinsic_residuals(scenario, joint)? {
        if r.residual > STRUCTURE_TOL {
            return Err(Error::StructureViolation {
                condition: r.condition,
                residual: r.residual,
                tolerance: STRUCTURE_TOL,
            });
        }
    }
    Ok(())
}

pub(crate) fn raw_achievability(scenario: Scenario, joint: &JointDistribution) -> Result<f64> {
    use axis::*;
    match scenario {
        Scenario::Noncausal => Ok(joint.mutual_information(&[W1, W2], &[Y, Z])?
            - joint.mutual_information(&[W1, W2], &[U, S])?),
        Scenario::PerfectChannel => Ok(joint.conditional_mutual_information(&[W2], &[Z], &[X])?
            + joint.group_entropy(&[X])?
            - joint.mutual_information(&[X, W2], &[U, S])?),
        Scenario::Lossless => Ok(joint.mutual_information(&[U, W1], &[Y, Z])?
            - joint.conditional_mutual_information(&[W1], &[S], &[U])?
            - joint.group_entropy(&[U])?),
        Scenario::Independent => {
            let (source_part, channel_part) = split_parts(joint)?;
            raw_independent(&source_part, &channel_part)
        }
        Scenario::CausalEncoding => Ok(joint.mutual_information(&[W1, W2], &[Y, Z])?
            - joint.conditional_mutual_information(&[W2], &[U, S], &[W1])?),
        Scenario::StrictlyCausalEncoding => Ok(joint.mutual_information(&[X, W2], &[Y, Z])?
            - joint.conditional_mutual_information(&[W2], &[U, S], &[X])?),
        Scenario::CausalDecoding => {
            Ok(joint.conditional_mutual_information(&[W1], &[Y, Z], &[W2])?
                - joint.mutual_information(&[W1, W2], &[U, S])?)
        }
        Scenario::StrictlyCausalDecoding => {
            Ok(joint.conditional_mutual_information(&[W1], &[Y, Z], &[V])?
                - joint.mutual_information(&[W1, V], &[U, S])?)
        }
    }
}

pub(crate) fn raw_converse(scenario: Scenario, joint: &JointDistribution) -> Result<f64> {
    use axis::*;
    match scenario {
        Scenario::Noncausal => {
            Ok(joint.conditional_mutual_information(&[W1], &[Y, Z], &[W2])?
                - joint.conditional_mutual_information(&[W2], &[U, S], &[W1])?)
        }
        _ => raw_achievability(scenario, joint),
    }
}

fn raw_independent(
    source_part: &JointDistribution,
    channel_part: &JointDistribution,
) -> Result<f64> {
    use axis::*;
    Ok(channel_part.mutual_information(&[W1], &[Y])?
        + source_part.mutual_information(&[W2], &[Z])?
        - channel_part.mutual_information(&[W1], &[S])?
        - source_part.mutual_information(&[W2], &[U])?)
}

/// Marginals over the source-side and channel-side variable groups.
pub fn split_parts(
    joint: &JointDistribution,
) -> Result<(JointDistribution, JointDistribution)> {
    use axis::*;
    Ok((
        joint.marginalize(&[U, Z, W2, V])?,
        joint.marginalize(&[S, X, W1, Y])?,
    ))
}

pub fn objective_noncausal_achievability(joint: &JointDistribution) -> Result<f64> {
    require_structure(Scenario::Noncausal, joint)?;
    raw_achievability(Scenario::Noncausal, joint)
}

pub fn objective_noncausal_converse(joint: &JointDistribution) -> Result<f64> {
    require_structure(Scenario::Noncausal, joint)?;
    raw_converse(Scenario::Noncausal, joint)
}

pub fn objective_perfect_channel(joint: &JointDistribution) -> Result<f64> {
    require_structure(Scenario::PerfectChannel, joint)?;
    raw_achievability(Scenario::PerfectChannel, joint)
}

pub fn objective_lossless(joint: &JointDistribution) -> Result<f64> {
    require_structure(Scenario::Lossless, joint)?;
    raw_achievability(Scenario::Lossless, joint)
}

pub fn objective_causal_encoding(joint: &JointDistribution) -> Result<f64> {
    require_structure(Scenario::CausalEncoding, joint)?;
    raw_achievability(Scenario::CausalEncoding, joint)
}

pub fn objective_causal_decoding(joint: &JointDistribution) -> Result<f64> {
    require_structure(Scenario::CausalDecoding, joint)?;
    raw_achievability(Scenario::CausalDecoding, joint)
}

fn expect_axis_set(part: &JointDistribution, want: &[&str], side: &str) -> Result<()> {
    let mut names: Vec<&str> = part.axes().iter().map(|a| a.name.as_str()).collect();
    names.sort_unstable();
    let mut want: Vec<&str> = want.to_vec();
    want.sort_unstable();
    if names != want {
        return Err(Error::AlphabetMismatch(format!(
            "{side} part must carry axes {want:?}, got {names:?}"
        )));
    }
    Ok(())
}

/// Independent-parts objective on the two product factors.
pub fn objective_independent(
    source_part: &JointDistribution,
    channel_part: &JointDistribution,
) -> Result<f64> {
    use axis::*;
    expect_axis_set(source_part, &[U, Z, W2, V], "source")?;
    expect_axis_set(channel_part, &[S, X, W1, Y], "channel")?;
    for (cond, residual) in [
        ("markov_w2", source_part.markov_residual(&[Z], &[U], &[W2])?),
        ("markov_v", source_part.markov_residual(&[V], &[Z, W2], &[U])?),
        ("markov_y", channel_part.markov_residual(&[Y], &[X, S], &[W1])?),
    ] {
        if residual > STRUCTURE_TOL {
            return Err(Error::StructureViolation {
                condition: cond.to_string(),
                residual,
                tolerance: STRUCTURE_TOL,
            });
        }
    }
    raw_independent(source_part, channel_part)
}

pub fn achievability_value(scenario: Scenario, joint: &JointDistribution) -> Result<f64> {
    require_structure(scenario, joint)?;
    raw_achievability(scenario, joint)
}

pub fn converse_value(scenario: Scenario, joint: &JointDistribution) -> Result<f64> {
    require_structure(scenario, joint)?;
    raw_converse(scenario, joint)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AchievableCertified,
    InfeasibleCertified,
    Gap,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::AchievableCertified => "achievable_certified",
            Verdict::InfeasibleCertified => "infeasible_certified",
            Verdict::Gap => "gap",
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ObjectiveReport {
    pub value: f64,
    pub converse_value: f64,
    pub rate_margin: f64,
    pub feasible: Verdict,
    pub structural_residuals: Vec<StructuralResidual>,
    pub tolerance: f64,
}

/// Run structural checks and both bounds on a candidate joint.
///
/// The verdict reads: achievable when the value clears the feasibility
/// band and the joint actually has the required structure; infeasible
/// when the converse bound is decisively negative (for a single joint
/// this concerns that joint's auxiliaries only); otherwise undecided.
pub fn evaluate_joint(
    spec: &ScenarioSpec,
    joint: &JointDistribution,
    tolerance: f64,
) -> Result<ObjectiveReport> {
    let structural_residuals = check_structure(spec, joint)?;
    let value = raw_achievability(spec.scenario(), joint)?;
    let converse_value = raw_converse(spec.scenario(), joint)?;
    let worst = max_residual(&structural_residuals);
    let feasible = if value > FEASIBILITY_TOL && worst <= tolerance {
        Verdict::AchievableCertified
    } else if converse_value < -FEASIBILITY_TOL {
        Verdict::InfeasibleCertified
    } else {
        Verdict::Gap
    };
    Ok(ObjectiveReport {
        value,
        converse_value,
        rate_margin: value.max(0.0),
        feasible,
        structural_residuals,
        tolerance,
    })
}

pub fn evaluate(spec: &ScenarioSpec, aux: &AuxScheme, tolerance: f64) -> Result<ObjectiveReport> {
    let joint = assemble_joint(spec, aux)?;
    evaluate_joint(spec, &joint, tolerance)
}

/// Three-rate region for routing a description over the channel next to
/// a plain message: message rate, in-band description rate and the rate
/// spent on state knowledge.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RateRegionReport {
    pub feasible: bool,
    pub corner: (f64, f64, f64),
}

/// Decide the region from the four informations: the description needs
/// (i_w2_u over a link of capacity i_w2_z), the channel code carries
/// i_w1_y but must spend i_w1_s on the state. The witness corner takes
/// the least message rate.
pub fn rate_region_from_information(
    i_w2_u: f64,
    i_w2_z: f64,
    i_w1_s: f64,
    i_w1_y: f64,
) -> RateRegionReport {
    let r_m = (i_w2_u - i_w2_z).max(0.0);
    let r_l = i_w2_u.min(i_w2_z);
    let r_j = i_w1_s;
    RateRegionReport {
        feasible: r_m + r_j <= i_w1_y + SEPARATION_SLACK,
        corner: (r_m, r_l, r_j),
    }
}

pub fn separation_rate_region(
    source_part: &JointDistribution,
    channel_part: &JointDistribution,
) -> Result<RateRegionReport> {
    use axis::*;
    expect_axis_set(source_part, &[U, Z, W2, V], "source")?;
    expect_axis_set(channel_part, &[S, X, W1, Y], "channel")?;
    Ok(rate_region_from_information(
        source_part.mutual_information(&[W2], &[U])?,
        source_part.mutual_information(&[W2], &[Z])?,
        channel_part.mutual_information(&[W1], &[S])?,
        channel_part.mutual_information(&[W1], &[Y])?,
    ))
}

/// A per-cell payoff (or cost) over a subset of the joint's axes.
#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(into = "RawObjective")]
pub struct ObjectiveFunction {
    axes: Vec<Alphabet>,
    table: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawObjective {
    axes: Vec<Alphabet>,
    table: Vec<f64>,
}

impl From<ObjectiveFunction> for RawObjective {
    fn from(o: ObjectiveFunction) -> Self {
        RawObjective {
            axes: o.axes,
            table: o.table,
        }
    }
}

impl TryFrom<RawObjective> for ObjectiveFunction {
    type Error = Error;
    fn try_from(raw: RawObjective) -> Result<Self> {
        ObjectiveFunction::new(raw.axes, raw.table)
    }
}

impl<'de> Deserialize<'de> for ObjectiveFunction {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawObjective::deserialize(de)?;
        ObjectiveFunction::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl ObjectiveFunction {
    pub fn new(axes: Vec<Alphabet>, table: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::EmptySelection);
        }
        let cells: usize = axes.iter().map(|a| a.size).product();
        if table.len() != cells {
            return Err(Error::ShapeMismatch {
                expected: cells,
                got: table.len(),
            });
        }
        for (i, &v) in table.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NegativeEntry { index: i, value: v });
            }
        }
        Ok(ObjectiveFunction { axes, table })
    }

    /// Indicator of disagreement between two axes.
    pub fn hamming(a: Alphabet, b: Alphabet) -> Result<Self> {
        let mut table = vec![1.0; a.size * b.size];
        for i in 0..a.size.min(b.size) {
            table[i * b.size + i] = 0.0;
        }
        ObjectiveFunction::new(vec![a, b], table)
    }

    pub fn axes(&self) -> &[Alphabet] {
        &self.axes
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }
}

/// Expectation of the payoff under the joint's marginal over its axes.
pub fn expected_objective(joint: &JointDistribution, phi: &ObjectiveFunction) -> Result<f64> {
    let names: Vec<&str> = phi.axes.iter().map(|a| a.name.as_str()).collect();
    let marginal = joint.marginalize(&names)?;
    // map marginal coordinates into the payoff's axis order
    let phi_strides = strides_of(&phi.axes.iter().map(|a| a.size).collect::<Vec<_>>());
    let mut contrib = vec![0usize; marginal.axes().len()];
    for (k, ax) in phi.axes.iter().enumerate() {
        let pos = marginal.axis_position(&ax.name)?;
        if marginal.axes()[pos].size != ax.size {
            return Err(Error::AlphabetMismatch(format!(
                "payoff axis {}({}) does not match joint's size {}",
                ax.name,
                ax.size,
                marginal.axes()[pos].size
            )));
        }
        contrib[pos] = phi_strides[k];
    }
    let sizes: Vec<usize> = marginal.axes().iter().map(|a| a.size).collect();
    let mut idx = vec![0usize; sizes.len()];
    let mut mapped = 0usize;
    let mut sum = 0.0;
    for &p in marginal.probs() {
        sum += p * phi.table[mapped];
        for d in (0..sizes.len()).rev() {
            idx[d] += 1;
            if idx[d] < sizes[d] {
                mapped += contrib[d];
                break;
            }
            idx[d] = 0;
            mapped -= contrib[d] * (sizes[d] - 1);
        }
    }
    Ok(sum)
}

/// Expected distortion between source and reconstruction.
pub fn distortion_of(joint: &JointDistribution, d: &ObjectiveFunction) -> Result<f64> {
    let names: Vec<&str> = d.axes.iter().map(|a| a.name.as_str()).collect();
    if names != [axis::U, axis::V] {
        return Err(Error::AlphabetMismatch(format!(
            "distortion must be over [U, V], got {names:?}"
        )));
    }
    expected_objective(joint, d)
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::prob::ConditionalKernel;
    use crate::testutil::*;

    /// Noncausal spec with a clean binary channel, no side information
    /// and a copy-Y target decoder.
    fn clean_channel_spec(encoder_copies_u: bool) -> ScenarioSpec {
        let one = |n: &str| Alphabet::new(n, 1);
        let source = JointDistribution::new(
            vec![binary("U"), one("S"), one("Z")],
            vec![0.5, 0.5],
        )
        .unwrap();
        let channel = ConditionalKernel::deterministic(
            vec![binary("X"), one("S")],
            vec![binary("Y")],
            |g| vec![g[0]],
        )
        .unwrap();
        let encoder = if encoder_copies_u {
            ConditionalKernel::deterministic(vec![binary("U"), one("S")], vec![binary("X")], |g| {
                vec![g[0]]
            })
            .unwrap()
        } else {
            ConditionalKernel::new(
                vec![binary("U"), one("S")],
                vec![binary("X")],
                vec![0.5, 0.5, 0.5, 0.5],
            )
            .unwrap()
        };
        let decoder = ConditionalKernel::deterministic(
            vec![binary("U"), one("S"), one("Z"), binary("X"), binary("Y")],
            vec![binary("V")],
            |g| vec![g[4]],
        )
        .unwrap();
        ScenarioSpec::new(Scenario::Noncausal, source, channel, encoder, decoder).unwrap()
    }

    /// Scheme sending a uniform codeword W1 = X through the channel,
    /// ignoring the source.
    fn uniform_codeword_aux(spec: &ScenarioSpec) -> AuxScheme {
        let one = |n: &str| Alphabet::new(n, 1);
        let mut enc = vec![0.0; 2 * 2 * 2];
        // rows (u,s); cells (x,w1,w2): half on (0,0,0), half on (1,1,0)
        for row in 0..2 {
            enc[row * 4] = 0.5;
            enc[row * 4 + 3] = 0.5;
        }
        let codeword_encoder = ConditionalKernel::new(
            vec![spec.u_axis().clone(), spec.s_axis().clone()],
            vec![spec.x_axis().clone(), binary("W1"), one("W2")],
            enc,
        )
        .unwrap();
        let codeword_decoder = ConditionalKernel::deterministic(
            vec![
                spec.y_axis().clone(),
                spec.z_axis().clone(),
                binary("W1"),
                one("W2"),
            ],
            vec![spec.v_axis().clone()],
            |g| vec![g[0]],
        )
        .unwrap();
        AuxScheme::Noncausal {
            codeword_encoder,
            codeword_decoder,
        }
    }

    fn singleton_aux(spec: &ScenarioSpec) -> AuxScheme {
        let one = |n: &str| Alphabet::new(n, 1);
        let codeword_encoder = ConditionalKernel::new(
            vec![spec.u_axis().clone(), spec.s_axis().clone()],
            vec![spec.x_axis().clone(), one("W1"), one("W2")],
            spec.target_encoder().probs().to_vec(),
        )
        .unwrap();
        let codeword_decoder = ConditionalKernel::deterministic(
            vec![
                spec.y_axis().clone(),
                spec.z_axis().clone(),
                one("W1"),
                one("W2"),
            ],
            vec![spec.v_axis().clone()],
            |g| vec![g[0]],
        )
        .unwrap();
        AuxScheme::Noncausal {
            codeword_encoder,
            codeword_decoder,
        }
    }

    #[test]
    fn constant_auxiliaries_score_zero() {
        let spec = small_noncausal_spec();
        let joint = assemble_joint(&spec, &singleton_aux(&spec)).unwrap();
        assert!(objective_noncausal_achievability(&joint).unwrap().abs() < 1e-12);
        assert!(objective_noncausal_converse(&joint).unwrap().abs() < 1e-12);
    }

    #[test]
    fn uniform_codeword_on_clean_channel_scores_one_bit() {
        let spec = clean_channel_spec(false);
        let joint = assemble_joint(&spec, &uniform_codeword_aux(&spec)).unwrap();
        let v = objective_noncausal_achievability(&joint).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn noncausal_values_match_entropy_sums() {
        let mut rg = rng(2024);
        for _ in 0..4 {
            let spec = random_noncausal_spec(&mut rg);
            let aux = random_noncausal_aux(&mut rg, &spec, 2, 2);
            let joint = assemble_joint(&spec, &aux).unwrap();
            let h = |g: &[&str]| entropy_oracle(&joint, g);
            let ach = h(&["Y", "Z"]) - h(&["W1", "W2", "Y", "Z"]) - h(&["U", "S"])
                + h(&["W1", "W2", "U", "S"]);
            let got = objective_noncausal_achievability(&joint).unwrap();
            assert!((got - ach).abs() < 1e-10, "{got} vs {ach}");
            let conv = h(&["Y", "Z", "W2"]) - h(&["W1", "W2", "Y", "Z"]) - h(&["W2"])
                - h(&["U", "S", "W1"])
                + h(&["U", "S", "W1", "W2"])
                + h(&["W1"]);
            let got = objective_noncausal_converse(&joint).unwrap();
            assert!((got - conv).abs() < 1e-10, "{got} vs {conv}");
        }
    }

    #[test]
    fn converse_collapses_when_description_is_constant() {
        let mut rg = rng(88);
        let spec = random_noncausal_spec(&mut rg);
        let aux = random_noncausal_aux(&mut rg, &spec, 2, 1);
        let joint = assemble_joint(&spec, &aux).unwrap();
        let conv = objective_noncausal_converse(&joint).unwrap();
        let direct = joint.mutual_information(&["W1"], &["Y", "Z"]).unwrap();
        assert!((conv - direct).abs() < 1e-12);
    }

    #[test]
    fn chain_violations_are_refused() {
        let mut rg = rng(300);
        let spec = random_noncausal_spec(&mut rg);
        let aux = random_noncausal_aux(&mut rg, &spec, 2, 2);
        let joint = assemble_joint(&spec, &aux).unwrap();
        let cells = joint.probs().len();
        let blurred: Vec<f64> = joint
            .probs()
            .iter()
            .map(|&p| 0.5 * p + 0.5 / cells as f64)
            .collect();
        let bad = JointDistribution::new(joint.axes().to_vec(), blurred).unwrap();
        assert!(matches!(
            objective_noncausal_achievability(&bad),
            Err(Error::StructureViolation { .. })
        ));
    }

    fn perfect_spec(encoder_copies_u: bool) -> ScenarioSpec {
        let base = clean_channel_spec(encoder_copies_u);
        ScenarioSpec::new(
            Scenario::PerfectChannel,
            base.source().clone(),
            base.channel().clone(),
            base.target_encoder().clone(),
            base.target_decoder().clone(),
        )
        .unwrap()
    }

    fn perfect_aux(spec: &ScenarioSpec) -> AuxScheme {
        let one = |n: &str| Alphabet::new(n, 1);
        AuxScheme::PerfectChannel {
            state_description: ConditionalKernel::deterministic(
                vec![spec.u_axis().clone(), spec.s_axis().clone(), spec.x_axis().clone()],
                vec![one("W2")],
                |_| vec![0],
            )
            .unwrap(),
            codeword_decoder: ConditionalKernel::deterministic(
                vec![spec.x_axis().clone(), spec.z_axis().clone(), one("W2")],
                vec![spec.v_axis().clone()],
                |g| vec![g[0]],
            )
            .unwrap(),
        }
    }

    #[test]
    fn identity_channel_values_at_the_extremes() {
        // free input: one bit of room
        let spec = perfect_spec(false);
        let joint = assemble_joint(&spec, &perfect_aux(&spec)).unwrap();
        let v = objective_perfect_channel(&joint).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "got {v}");
        // input pinned to the source: no room
        let spec = perfect_spec(true);
        let joint = assemble_joint(&spec, &perfect_aux(&spec)).unwrap();
        let v = objective_perfect_channel(&joint).unwrap();
        assert!(v.abs() < 1e-12, "got {v}");
    }

    #[test]
    fn identity_channel_matches_entropy_sums_and_general_form() {
        let mut rg = rng(41);
        for _ in 0..4 {
            let spec = random_spec(Scenario::PerfectChannel, &mut rg);
            let aux = random_aux(&mut rg, &spec, 2, 2);
            let joint = assemble_joint(&spec, &aux).unwrap();
            let h = |g: &[&str]| entropy_oracle(&joint, g);
            let want = h(&["Z", "X"]) - h(&["W2", "Z", "X"]) - h(&["U", "S"])
                + h(&["X", "W2", "U", "S"]);
            let got = objective_perfect_channel(&joint).unwrap();
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
            // embedding: the general noncausal value agrees on this joint
            let noncausal = raw_achievability(Scenario::Noncausal, &joint).unwrap();
            assert!((got - noncausal).abs() < 1e-9, "{got} vs {noncausal}");
        }
    }

    fn lossless_spec(encoder_copies_u: bool) -> ScenarioSpec {
        let base = clean_channel_spec(encoder_copies_u);
        let one = |n: &str| Alphabet::new(n, 1);
        let decoder = ConditionalKernel::deterministic(
            vec![binary("U"), one("S"), one("Z"), binary("X"), binary("Y")],
            vec![binary("V")],
            |g| vec![g[0]],
        )
        .unwrap();
        ScenarioSpec::new(
            Scenario::Lossless,
            base.source().clone(),
            base.channel().clone(),
            base.target_encoder().clone(),
            decoder,
        )
        .unwrap()
    }

    fn lossless_aux(spec: &ScenarioSpec, copy: bool) -> AuxScheme {
        let one = |n: &str| Alphabet::new(n, 1);
        let codeword_encoder = if copy {
            ConditionalKernel::deterministic(
                vec![spec.u_axis().clone(), spec.s_axis().clone()],
                vec![spec.x_axis().clone(), one("W1")],
                |g| vec![g[0], 0],
            )
            .unwrap()
        } else {
            ConditionalKernel::new(
                vec![spec.u_axis().clone(), spec.s_axis().clone()],
                vec![spec.x_axis().clone(), one("W1")],
                vec![0.5, 0.5, 0.5, 0.5],
            )
            .unwrap()
        };
        AuxScheme::Lossless { codeword_encoder }
    }

    #[test]
    fn copy_coding_sits_on_the_boundary() {
        let spec = lossless_spec(true);
        let joint = assemble_joint(&spec, &lossless_aux(&spec, true)).unwrap();
        let v = objective_lossless(&joint).unwrap();
        assert!(v.abs() < 1e-12, "got {v}");
    }

    #[test]
    fn useless_input_loses_a_bit() {
        let spec = lossless_spec(false);
        let joint = assemble_joint(&spec, &lossless_aux(&spec, false)).unwrap();
        let v = objective_lossless(&joint).unwrap();
        assert!((v + 1.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn lossless_matches_entropy_sums_and_general_form() {
        let mut rg = rng(42);
        for _ in 0..4 {
            let spec = random_spec(Scenario::Lossless, &mut rg);
            let aux = random_aux(&mut rg, &spec, 2, 2);
            let joint = assemble_joint(&spec, &aux).unwrap();
            let h = |g: &[&str]| entropy_oracle(&joint, g);
            let want = h(&["Y", "Z"]) - h(&["U", "W1", "Y", "Z"]) - h(&["S", "U"])
                + h(&["U", "S", "W1"]);
            let got = objective_lossless(&joint).unwrap();
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
            let noncausal = raw_achievability(Scenario::Noncausal, &joint).unwrap();
            assert!((got - noncausal).abs() < 1e-9, "{got} vs {noncausal}");
        }
    }

    #[test]
    fn independent_parts_extremes() {
        // channel part: S constant, W1 = X = Y uniform; one clean bit
        let one = |n: &str| Alphabet::new(n, 1);
        let mut cp = vec![0.0; 8];
        // axes (S, X, W1, Y): cells (0,x,x,x)
        cp[0] = 0.5; // x=0,w1=0,y=0
        cp[7] = 0.5; // x=1,w1=1,y=1
        let channel_part = JointDistribution::new(
            vec![one("S"), binary("X"), Alphabet::new("W1", 2), binary("Y")],
            cp,
        )
        .unwrap();
        let source_part = JointDistribution::uniform(vec![
            binary("U"),
            binary("Z"),
            Alphabet::new("W2", 1),
            binary("V"),
        ])
        .unwrap();
        let v = objective_independent(&source_part, &channel_part).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "got {v}");
        // all-constant auxiliaries: zero
        let flat_cp = JointDistribution::uniform(vec![
            one("S"),
            binary("X"),
            Alphabet::new("W1", 1),
            binary("Y"),
        ])
        .unwrap();
        let v = objective_independent(&source_part, &flat_cp).unwrap();
        assert!(v.abs() < 1e-12, "got {v}");
    }

    #[test]
    fn independent_value_matches_entropy_sums() {
        let mut rg = rng(43);
        for _ in 0..4 {
            let spec = random_spec(Scenario::Independent, &mut rg);
            let aux = random_aux(&mut rg, &spec, 2, 2);
            let joint = assemble_joint(&spec, &aux).unwrap();
            let h = |g: &[&str]| entropy_oracle(&joint, g);
            let want = h(&["Y"]) - h(&["W1", "Y"]) + h(&["Z"]) - h(&["W2", "Z"]) - h(&["S"])
                + h(&["W1", "S"])
                - h(&["U"])
                + h(&["W2", "U"]);
            let (sp, cpart) = split_parts(&joint).unwrap();
            let got = objective_independent(&sp, &cpart).unwrap();
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
            let via_dispatch = achievability_value(Scenario::Independent, &joint).unwrap();
            assert!((got - via_dispatch).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_region_basics() {
        let all_zero = rate_region_from_information(0.0, 0.0, 0.0, 0.0);
        assert!(all_zero.feasible);
        assert_eq!(all_zero.corner, (0.0, 0.0, 0.0));
        // full bit to describe, no in-band room, half-bit channel
        let blocked = rate_region_from_information(1.0, 0.0, 0.0, 0.5);
        assert!(!blocked.feasible);
        assert_eq!(blocked.corner, (1.0, 0.0, 0.0));
    }

    #[test]
    fn causal_values_match_entropy_sums() {
        let mut rg = rng(44);
        for _ in 0..3 {
            let spec = random_spec(Scenario::CausalEncoding, &mut rg);
            let aux = random_aux(&mut rg, &spec, 2, 2);
            let joint = assemble_joint(&spec, &aux).unwrap();
            let h = |g: &[&str]| entropy_oracle(&joint, g);
            let want = h(&["Y", "Z"]) - h(&["W1", "W2", "Y", "Z"]) + h(&["W1"])
                - h(&["U", "S", "W1"])
                + h(&["U", "S", "W1", "W2"]);
            let got = objective_causal_encoding(&joint).unwrap();
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
            // with the codeword independent of the source, the general
            // noncausal value coincides
            let noncausal = raw_achievability(Scenario::Noncausal, &joint).unwrap();
            assert!((got - noncausal).abs() < 1e-9, "{got} vs {noncausal}");
        }
        for _ in 0..3 {
            let spec = random_spec(Scenario::CausalDecoding, &mut rg);
            let aux = random_aux(&mut rg, &spec, 2, 2);
            let joint = assemble_joint(&spec, &aux).unwrap();
            let h = |g: &[&str]| entropy_oracle(&joint, g);
            let want = h(&["Y", "Z", "W2"]) - h(&["W1", "W2", "Y", "Z"]) - h(&["W2"])
                - h(&["U", "S"])
                + h(&["U", "S", "W1", "W2"]);
            let got = objective_causal_decoding(&joint).unwrap();
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn constant_description_collapses_causal_decoding() {
        let mut rg = rng(45);
        let spec = random_spec(Scenario::CausalDecoding, &mut rg);
        let aux = random_aux(&mut rg, &spec, 2, 1);
        let joint = assemble_joint(&spec, &aux).unwrap();
        let got = objective_causal_decoding(&joint).unwrap();
        let noncausal = raw_achievability(Scenario::Noncausal, &joint).unwrap();
        assert!((got - noncausal).abs() < 1e-12);
    }

    #[test]
    fn strict_variants_equal_substituted_general_forms() {
        let mut rg = rng(46);
        for _ in 0..3 {
            let spec = random_spec(Scenario::StrictlyCausalEncoding, &mut rg);
            let aux = random_aux(&mut rg, &spec, 2, 2);
            let joint = assemble_joint(&spec, &aux).unwrap();
            let strict = achievability_value(Scenario::StrictlyCausalEncoding, &joint).unwrap();
            // W1 is tied to X, so the general causal form agrees
            let general = raw_achievability(Scenario::CausalEncoding, &joint).unwrap();
            assert!((strict - general).abs() < 1e-9, "{strict} vs {general}");
        }
        for _ in 0..3 {
            let spec = random_spec(Scenario::StrictlyCausalDecoding, &mut rg);
            let aux = random_aux(&mut rg, &spec, 2, 2);
            let joint = assemble_joint(&spec, &aux).unwrap();
            let strict = achievability_value(Scenario::StrictlyCausalDecoding, &joint).unwrap();
            let general = raw_achievability(Scenario::CausalDecoding, &joint).unwrap();
            assert!((strict - general).abs() < 1e-9, "{strict} vs {general}");
        }
    }

    #[test]
    fn relabeling_symbols_preserves_values() {
        let mut rg = rng(47);
        let spec = random_noncausal_spec(&mut rg);
        let aux = random_noncausal_aux(&mut rg, &spec, 2, 2);
        let joint = assemble_joint(&spec, &aux).unwrap();
        // swap the two symbols of X and of W1
        let sizes: Vec<usize> = joint.axes().iter().map(|a| a.size).collect();
        let mut probs = vec![0.0; joint.probs().len()];
        for (flat, &p) in joint.probs().iter().enumerate() {
            let mut idx = vec![0usize; sizes.len()];
            let mut rest = flat;
            for d in (0..sizes.len()).rev() {
                idx[d] = rest % sizes[d];
                rest /= sizes[d];
            }
            idx[5] = 1 - idx[5];
            idx[3] = 1 - idx[3];
            let mut to = 0usize;
            for d in 0..sizes.len() {
                to = to * sizes[d] + idx[d];
            }
            probs[to] = p;
        }
        let relabeled = JointDistribution::new(joint.axes().to_vec(), probs).unwrap();
        for scenario in [Scenario::Noncausal] {
            let a = raw_achievability(scenario, &joint).unwrap();
            let b = raw_achievability(scenario, &relabeled).unwrap();
            assert!((a - b).abs() < 1e-12);
            let a = raw_converse(scenario, &joint).unwrap();
            let b = raw_converse(scenario, &relabeled).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn report_verdicts() {
        // room to spare: certified achievable
        let spec = clean_channel_spec(false);
        let report = evaluate(&spec, &uniform_codeword_aux(&spec), STRUCTURE_TOL).unwrap();
        assert_eq!(report.feasible, Verdict::AchievableCertified);
        assert!((report.rate_margin - 1.0).abs() < 1e-9);
        // a bit short: certified infeasible
        let spec = lossless_spec(false);
        let report = evaluate(&spec, &lossless_aux(&spec, false), STRUCTURE_TOL).unwrap();
        assert_eq!(report.feasible, Verdict::InfeasibleCertified);
        assert!((report.value + 1.0).abs() < 1e-9);
        assert_eq!(report.rate_margin, 0.0);
        // nothing decided either way
        let spec = small_noncausal_spec();
        let report = evaluate(&spec, &singleton_aux(&spec), STRUCTURE_TOL).unwrap();
        assert_eq!(report.feasible, Verdict::Gap);
    }

    #[test]
    fn payoff_expectations() {
        let spec = clean_channel_spec(false);
        let joint = assemble_joint(&spec, &uniform_codeword_aux(&spec)).unwrap();
        let ones =
            ObjectiveFunction::new(vec![binary("U")], vec![1.0, 1.0]).unwrap();
        assert!((expected_objective(&joint, &ones).unwrap() - 1.0).abs() < 1e-12);
        let cost = ObjectiveFunction::new(vec![binary("X")], vec![0.0, 1.0]).unwrap();
        assert!((expected_objective(&joint, &cost).unwrap() - 0.5).abs() < 1e-12);
        // V copies Y = X, which is independent of U and uniform
        let ham = ObjectiveFunction::hamming(binary("U"), binary("V")).unwrap();
        assert!((distortion_of(&joint, &ham).unwrap() - 0.5).abs() < 1e-12);
        // V = U exactly
        let spec = lossless_spec(true);
        let joint = assemble_joint(&spec, &lossless_aux(&spec, true)).unwrap();
        assert!(distortion_of(&joint, &ham).unwrap().abs() < 1e-12);
    }

    #[test]
    fn payoff_expectation_matches_direct_sum() {
        let mut rg = rng(48);
        let spec = random_noncausal_spec(&mut rg);
        let aux = random_noncausal_aux(&mut rg, &spec, 2, 2);
        let joint = assemble_joint(&spec, &aux).unwrap();
        // payoff over (X, U) with axes deliberately out of joint order
        let table: Vec<f64> = (0..4).map(|_| rg.random::<f64>()).collect();
        let phi =
            ObjectiveFunction::new(vec![binary("X"), binary("U")], table.clone()).unwrap();
        let got = expected_objective(&joint, &phi).unwrap();
        let sizes: Vec<usize> = joint.axes().iter().map(|a| a.size).collect();
        let mut want = 0.0;
        for (flat, &p) in joint.probs().iter().enumerate() {
            let mut idx = vec![0usize; sizes.len()];
            let mut rest = flat;
            for d in (0..sizes.len()).rev() {
                idx[d] = rest % sizes[d];
                rest /= sizes[d];
            }
            want += p * table[idx[5] * 2 + idx[0]];
        }
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}
