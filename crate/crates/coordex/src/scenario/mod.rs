//! Scenario descriptions: who observes what, and when.
//!
//! A scenario fixes the source of (U, S, Z), the channel from (X, S) to Y,
//! and the target behavior the encoder and decoder should exhibit. The
//! eight tags differ in the causality of the encoder and decoder and in
//! degenerate structure (perfect channel, lossless reconstruction,
//! independent source and channel parts).

mod assemble;
mod objective;
mod scheme;
mod structure;

pub use assemble::assemble_joint;
pub use objective::{
    achievability_value, converse_value, distortion_of, evaluate, evaluate_joint,
    expected_objective, objective_causal_decoding, objective_causal_encoding,
    objective_independent, objective_lossless, objective_noncausal_achievability,
    objective_noncausal_converse, objective_perfect_channel, rate_region_from_information,
    separation_rate_region, split_parts, ObjectiveFunction, ObjectiveReport, RateRegionReport,
    Verdict, FEASIBILITY_TOL, STRUCTURE_TOL,
};
pub(crate) use assemble::{
    factor_plan, product_over, Factor, SlotSpec, P_S, P_U, P_V, P_W1, P_W2, P_X, P_Y, P_Z,
};
pub use scheme::AuxScheme;
pub use structure::{check_structure, max_residual, StructuralResidual};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{Alphabet, ConditionalKernel, JointDistribution, NORMALIZATION_TOL};

/// Canonical axis names. Joints assembled by this module always carry the
/// eight axes in the order U, S, Z, W1, W2, X, Y, V; visible (target)
/// joints carry U, S, Z, X, Y, V.
pub mod axis {
    pub const U: &str = "U";
    pub const S: &str = "S";
    pub const Z: &str = "Z";
    pub const W1: &str = "W1";
    pub const W2: &str = "W2";
    pub const X: &str = "X";
    pub const Y: &str = "Y";
    pub const V: &str = "V";
}

/// Full assembled axis order.
pub const FULL_AXES: [&str; 8] = [
    axis::U,
    axis::S,
    axis::Z,
    axis::W1,
    axis::W2,
    axis::X,
    axis::Y,
    axis::V,
];

/// Visible axis order for target joints.
pub const VISIBLE_AXES: [&str; 6] = [axis::U, axis::S, axis::Z, axis::X, axis::Y, axis::V];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Noncausal,
    PerfectChannel,
    Lossless,
    Independent,
    CausalEncoding,
    StrictlyCausalEncoding,
    CausalDecoding,
    StrictlyCausalDecoding,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Noncausal,
        Scenario::PerfectChannel,
        Scenario::Lossless,
        Scenario::Independent,
        Scenario::CausalEncoding,
        Scenario::StrictlyCausalEncoding,
        Scenario::CausalDecoding,
        Scenario::StrictlyCausalDecoding,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Scenario::Noncausal => "noncausal",
            Scenario::PerfectChannel => "perfect_channel",
            Scenario::Lossless => "lossless",
            Scenario::Independent => "independent",
            Scenario::CausalEncoding => "causal_encoding",
            Scenario::StrictlyCausalEncoding => "strictly_causal_encoding",
            Scenario::CausalDecoding => "causal_decoding",
            Scenario::StrictlyCausalDecoding => "strictly_causal_decoding",
        }
    }

    /// Whether the achievability objective is also the converse bound.
    /// Only the noncausal scenario has an open gap between the two.
    pub fn is_tight(self) -> bool {
        !matches!(self, Scenario::Noncausal)
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A coordination problem: source, channel and the target behavior.
#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(into = "RawSpec")]
pub struct ScenarioSpec {
    scenario: Scenario,
    source: JointDistribution,
    channel: ConditionalKernel,
    target_encoder: ConditionalKernel,
    target_decoder: ConditionalKernel,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawSpec {
    scenario: Scenario,
    source: JointDistribution,
    channel: ConditionalKernel,
    target_encoder: ConditionalKernel,
    target_decoder: ConditionalKernel,
}

impl From<ScenarioSpec> for RawSpec {
    fn from(s: ScenarioSpec) -> Self {
        RawSpec {
            scenario: s.scenario,
            source: s.source,
            channel: s.channel,
            target_encoder: s.target_encoder,
            target_decoder: s.target_decoder,
        }
    }
}

impl TryFrom<RawSpec> for ScenarioSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        ScenarioSpec::new(
            raw.scenario,
            raw.source,
            raw.channel,
            raw.target_encoder,
            raw.target_decoder,
        )
    }
}

impl<'de> Deserialize<'de> for ScenarioSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSpec::deserialize(de)?;
        ScenarioSpec::try_from(raw).map_err(serde::de::Error::custom)
    }
}

fn expect_axis_names(kind: &str, axes: &[Alphabet], names: &[&str]) -> Result<()> {
    let got: Vec<&str> = axes.iter().map(|a| a.name.as_str()).collect();
    if got != names {
        return Err(Error::AlphabetMismatch(format!(
            "{kind} axes must be {names:?}, got {got:?}"
        )));
    }
    Ok(())
}

fn expect_size(kind: &str, ax: &Alphabet, size: usize) -> Result<()> {
    if ax.size != size {
        return Err(Error::AlphabetMismatch(format!(
            "{kind} axis {} has size {}, expected {size}",
            ax.name, ax.size
        )));
    }
    Ok(())
}

impl ScenarioSpec {
    pub fn new(
        scenario: Scenario,
        source: JointDistribution,
        channel: ConditionalKernel,
        target_encoder: ConditionalKernel,
        target_decoder: ConditionalKernel,
    ) -> Result<Self> {
        let spec = ScenarioSpec {
            scenario,
            source,
            channel,
            target_encoder,
            target_decoder,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        expect_axis_names("source", self.source.axes(), &[axis::U, axis::S, axis::Z])?;
        expect_axis_names("channel given", self.channel.given_axes(), &[axis::X, axis::S])?;
        expect_axis_names("channel output", self.channel.axes(), &[axis::Y])?;
        expect_axis_names(
            "target_encoder given",
            self.target_encoder.given_axes(),
            &[axis::U, axis::S],
        )?;
        expect_axis_names("target_encoder output", self.target_encoder.axes(), &[axis::X])?;
        expect_axis_names(
            "target_decoder given",
            self.target_decoder.given_axes(),
            &[axis::U, axis::S, axis::Z, axis::X, axis::Y],
        )?;
        expect_axis_names("target_decoder output", self.target_decoder.axes(), &[axis::V])?;

        let u = &self.source.axes()[0];
        let s = &self.source.axes()[1];
        let z = &self.source.axes()[2];
        let x = &self.channel.given_axes()[0];
        let y = &self.channel.axes()[0];
        let v = &self.target_decoder.axes()[0];
        expect_size("channel", &self.channel.given_axes()[1], s.size)?;
        expect_size("target_encoder", &self.target_encoder.given_axes()[0], u.size)?;
        expect_size("target_encoder", &self.target_encoder.given_axes()[1], s.size)?;
        expect_size("target_encoder", &self.target_encoder.axes()[0], x.size)?;
        let dec_given = self.target_decoder.given_axes();
        for (ax, size) in dec_given.iter().zip([u.size, s.size, z.size, x.size, y.size]) {
            expect_size("target_decoder", ax, size)?;
        }
        for r in 0..self.channel.rows() {
            if !self.channel.is_row_defined(r) {
                return Err(Error::InvalidConfig(format!(
                    "channel row {r} is not stochastic"
                )));
            }
        }

        match self.scenario {
            Scenario::PerfectChannel => self.validate_identity_channel(x.size, y.size),
            Scenario::Lossless => self.validate_copy_decoder(u.size, v.size),
            Scenario::Independent => self.validate_product_structure(),
            _ => Ok(()),
        }
    }

    /// The channel must copy X to Y exactly, for every state.
    fn validate_identity_channel(&self, x_size: usize, y_size: usize) -> Result<()> {
        if x_size != y_size {
            return Err(Error::InvalidConfig(format!(
                "identity channel needs matching alphabets, got |X|={x_size}, |Y|={y_size}"
            )));
        }
        let s_size = self.channel.given_axes()[1].size;
        for xi in 0..x_size {
            for si in 0..s_size {
                let row = self.channel.row(self.channel.row_index(&[xi, si])).unwrap();
                for (yi, &p) in row.iter().enumerate() {
                    let want = if yi == xi { 1.0 } else { 0.0 };
                    if (p - want).abs() > NORMALIZATION_TOL {
                        return Err(Error::InvalidConfig(format!(
                            "channel is not the identity at x={xi}, s={si}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The target decoder must copy U to V exactly wherever defined.
    fn validate_copy_decoder(&self, u_size: usize, v_size: usize) -> Result<()> {
        if u_size != v_size {
            return Err(Error::InvalidConfig(format!(
                "copy decoder needs matching alphabets, got |U|={u_size}, |V|={v_size}"
            )));
        }
        let gsizes: Vec<usize> = self.target_decoder.given_axes().iter().map(|a| a.size).collect();
        let mut gidx = vec![0usize; gsizes.len()];
        for r in 0..self.target_decoder.rows() {
            if let Some(row) = self.target_decoder.row(r) {
                for (vi, &p) in row.iter().enumerate() {
                    let want = if vi == gidx[0] { 1.0 } else { 0.0 };
                    if (p - want).abs() > NORMALIZATION_TOL {
                        return Err(Error::InvalidConfig(format!(
                            "target decoder does not copy U at row {r}"
                        )));
                    }
                }
            }
            for d in (0..gsizes.len()).rev() {
                gidx[d] += 1;
                if gidx[d] < gsizes[d] {
                    break;
                }
                gidx[d] = 0;
            }
        }
        Ok(())
    }

    /// Source must factor as P(u,z) x P(s); the target encoder may depend
    /// only on s and the target decoder only on (u,z).
    fn validate_product_structure(&self) -> Result<()> {
        let uz = self.source.marginalize(&[axis::U, axis::Z])?;
        let s = self.source.marginalize(&[axis::S])?;
        let mut residual = 0.0f64;
        let (u_size, s_size, z_size) = (
            self.source.axes()[0].size,
            self.source.axes()[1].size,
            self.source.axes()[2].size,
        );
        for ui in 0..u_size {
            for si in 0..s_size {
                for zi in 0..z_size {
                    let p = self.source.get(&[ui, si, zi]);
                    let q = uz.get(&[ui, zi]) * s.get(&[si]);
                    residual += (p - q).abs();
                }
            }
        }
        if 0.5 * residual > NORMALIZATION_TOL {
            return Err(Error::InvalidConfig(format!(
                "source does not factor into (U,Z) x (S), deviation {:.3e}",
                0.5 * residual
            )));
        }
        // encoder rows must agree across u for fixed s
        for si in 0..s_size {
            let base = self.target_encoder.row(self.target_encoder.row_index(&[0, si]));
            for ui in 1..u_size {
                let row = self.target_encoder.row(self.target_encoder.row_index(&[ui, si]));
                match (base, row) {
                    (Some(b), Some(r)) => {
                        let tv: f64 =
                            0.5 * b.iter().zip(r).map(|(a, c)| (a - c).abs()).sum::<f64>();
                        if tv > NORMALIZATION_TOL {
                            return Err(Error::InvalidConfig(format!(
                                "target encoder depends on u at s={si}"
                            )));
                        }
                    }
                    _ => continue,
                }
            }
        }
        // decoder rows must agree across (s,x,y) for fixed (u,z)
        let x_size = self.channel.given_axes()[0].size;
        let y_size = self.channel.axes()[0].size;
        for ui in 0..u_size {
            for zi in 0..z_size {
                let base = self
                    .target_decoder
                    .row(self.target_decoder.row_index(&[ui, 0, zi, 0, 0]));
                for si in 0..s_size {
                    for xi in 0..x_size {
                        for yi in 0..y_size {
                            let row = self
                                .target_decoder
                                .row(self.target_decoder.row_index(&[ui, si, zi, xi, yi]));
                            if let (Some(b), Some(r)) = (base, row) {
                                let tv: f64 = 0.5
                                    * b.iter().zip(r).map(|(a, c)| (a - c).abs()).sum::<f64>();
                                if tv > NORMALIZATION_TOL {
                                    return Err(Error::InvalidConfig(format!(
                                        "target decoder depends on (s,x,y) at u={ui}, z={zi}"
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn source(&self) -> &JointDistribution {
        &self.source
    }

    pub fn channel(&self) -> &ConditionalKernel {
        &self.channel
    }

    pub fn target_encoder(&self) -> &ConditionalKernel {
        &self.target_encoder
    }

    pub fn target_decoder(&self) -> &ConditionalKernel {
        &self.target_decoder
    }

    pub fn u_axis(&self) -> &Alphabet {
        &self.source.axes()[0]
    }

    pub fn s_axis(&self) -> &Alphabet {
        &self.source.axes()[1]
    }

    pub fn z_axis(&self) -> &Alphabet {
        &self.source.axes()[2]
    }

    pub fn x_axis(&self) -> &Alphabet {
        &self.channel.given_axes()[0]
    }

    pub fn y_axis(&self) -> &Alphabet {
        &self.channel.axes()[0]
    }

    pub fn v_axis(&self) -> &Alphabet {
        &self.target_decoder.axes()[0]
    }

    /// The behavior being asked for: the joint law of (U,S,Z,X,Y,V) when
    /// the target encoder and decoder act on the source through the
    /// channel.
    pub fn target_joint(&self) -> Result<JointDistribution> {
        let axes: Vec<Alphabet> = vec![
            self.u_axis().clone(),
            self.s_axis().clone(),
            self.z_axis().clone(),
            self.x_axis().clone(),
            self.y_axis().clone(),
            self.v_axis().clone(),
        ];
        let factors = vec![
            Factor::from_table(&axes, &[0, 1, 2], self.source.probs().to_vec())?,
            Factor::from_kernel(&axes, &[0, 1], &[3], &self.target_encoder)?,
            Factor::from_kernel(&axes, &[3, 1], &[4], &self.channel)?,
            Factor::from_kernel(&axes, &[0, 1, 2, 3, 4], &[5], &self.target_decoder)?,
        ];
        product_over(axes, &factors)
    }
}
