//! Building the full eight-variable joint from a spec and a scheme.
//!
//! Every scenario's joint is a product of factors, each touching a
//! subset of the canonical axes (U, S, Z, W1, W2, X, Y, V). Tied
//! variables (W1 = X in the perfect-channel and strictly-causal-encoding
//! cases, W2 = U and V = U in the lossless case, V = W2 in the
//! strictly-causal-decoding case) enter as identity factors.

use crate::error::{Error, Result};
use crate::prob::{strides_of, Alphabet, ConditionalKernel, JointDistribution};

use super::{axis, AuxScheme, Scenario, ScenarioSpec};

// positions within the canonical eight-axis order
pub(crate) const P_U: usize = 0;
pub(crate) const P_S: usize = 1;
pub(crate) const P_Z: usize = 2;
pub(crate) const P_W1: usize = 3;
pub(crate) const P_W2: usize = 4;
pub(crate) const P_X: usize = 5;
pub(crate) const P_Y: usize = 6;
pub(crate) const P_V: usize = 7;

/// One multiplicative factor of a joint, with a per-axis stride table
/// into its own flattened values.
pub(crate) struct Factor {
    contrib: Vec<usize>,
    table: Vec<f64>,
}

impl Factor {
    /// Per-axis stride into this factor's table; zero for untouched axes.
    pub(crate) fn contrib(&self) -> &[usize] {
        &self.contrib
    }

    pub(crate) fn table(&self) -> &[f64] {
        &self.table
    }

    fn contrib_for(axes: &[Alphabet], positions: &[usize]) -> Vec<usize> {
        let sizes: Vec<usize> = positions.iter().map(|&p| axes[p].size).collect();
        let strides = strides_of(&sizes);
        let mut contrib = vec![0usize; axes.len()];
        for (stride, &p) in strides.iter().zip(positions) {
            contrib[p] = *stride;
        }
        contrib
    }

    /// Raw table over `axes[positions]` in the order given.
    pub(crate) fn from_table(
        axes: &[Alphabet],
        positions: &[usize],
        table: Vec<f64>,
    ) -> Result<Factor> {
        let cells: usize = positions.iter().map(|&p| axes[p].size).product();
        if table.len() != cells {
            return Err(Error::ShapeMismatch {
                expected: cells,
                got: table.len(),
            });
        }
        Ok(Factor {
            contrib: Factor::contrib_for(axes, positions),
            table,
        })
    }

    /// Kernel factor; the kernel's axes must match `axes` at the stated
    /// positions by name and size.
    pub(crate) fn from_kernel(
        axes: &[Alphabet],
        given_pos: &[usize],
        out_pos: &[usize],
        kernel: &ConditionalKernel,
    ) -> Result<Factor> {
        let check = |want_pos: &[usize], got: &[Alphabet], side: &str| -> Result<()> {
            if want_pos.len() != got.len() {
                return Err(Error::AlphabetMismatch(format!(
                    "kernel {side} axes: expected {} axes, got {}",
                    want_pos.len(),
                    got.len()
                )));
            }
            for (&p, g) in want_pos.iter().zip(got) {
                if axes[p] != *g {
                    return Err(Error::AlphabetMismatch(format!(
                        "kernel {side} axis {}({}) does not match {}({})",
                        g.name, g.size, axes[p].name, axes[p].size
                    )));
                }
            }
            Ok(())
        };
        check(given_pos, kernel.given_axes(), "given")?;
        check(out_pos, kernel.axes(), "output")?;
        let positions: Vec<usize> = given_pos.iter().chain(out_pos).copied().collect();
        Ok(Factor {
            contrib: Factor::contrib_for(axes, &positions),
            table: kernel.probs().to_vec(),
        })
    }

    /// Identity tie between two equal-sized axes.
    fn coupling(axes: &[Alphabet], a: usize, b: usize) -> Result<Factor> {
        let n = axes[a].size;
        if axes[b].size != n {
            return Err(Error::AlphabetMismatch(format!(
                "tied axes {}({}) and {}({}) differ in size",
                axes[a].name, axes[a].size, axes[b].name, axes[b].size
            )));
        }
        let mut table = vec![0.0; n * n];
        for i in 0..n {
            table[i * n + i] = 1.0;
        }
        Factor::from_table(axes, &[a, b], table)
    }
}

/// Product of factors over the given axes, normalized-checked.
pub(crate) fn product_over(axes: Vec<Alphabet>, factors: &[Factor]) -> Result<JointDistribution> {
    let sizes: Vec<usize> = axes.iter().map(|a| a.size).collect();
    let cells: usize = sizes.iter().product();
    let n = axes.len();
    let mut probs = vec![0.0; cells];
    let mut idx = vec![0usize; n];
    let mut mapped = vec![0usize; factors.len()];
    for slot in probs.iter_mut() {
        let mut p = 1.0;
        for (f, &m) in factors.iter().zip(&mapped) {
            p *= f.table[m];
            if p == 0.0 {
                break;
            }
        }
        *slot = p;
        for ax in (0..n).rev() {
            idx[ax] += 1;
            if idx[ax] < sizes[ax] {
                for (f, m) in factors.iter().zip(mapped.iter_mut()) {
                    *m += f.contrib[ax];
                }
                break;
            }
            idx[ax] = 0;
            for (f, m) in factors.iter().zip(mapped.iter_mut()) {
                *m -= f.contrib[ax] * (sizes[ax] - 1);
            }
        }
    }
    JointDistribution::new(axes, probs)
}

/// A free factor's position in the assembly: its name matches the
/// scheme's factor of the same name.
#[derive(Clone, Debug)]
pub(crate) struct SlotSpec {
    pub name: &'static str,
    pub given_pos: Vec<usize>,
    pub out_pos: Vec<usize>,
}

impl SlotSpec {
    fn new(name: &'static str, given_pos: &[usize], out_pos: &[usize]) -> SlotSpec {
        SlotSpec {
            name,
            given_pos: given_pos.to_vec(),
            out_pos: out_pos.to_vec(),
        }
    }

    pub fn given_axes(&self, axes: &[Alphabet]) -> Vec<Alphabet> {
        self.given_pos.iter().map(|&p| axes[p].clone()).collect()
    }

    pub fn out_axes(&self, axes: &[Alphabet]) -> Vec<Alphabet> {
        self.out_pos.iter().map(|&p| axes[p].clone()).collect()
    }
}

/// Fixed factors plus free slots for one scenario at chosen auxiliary
/// alphabet sizes. Scenarios that tie W1 or W2 to another variable force
/// those sizes, ignoring the requested ones.
pub(crate) struct FactorPlan {
    pub axes: Vec<Alphabet>,
    pub fixed: Vec<Factor>,
    pub slots: Vec<SlotSpec>,
}

pub(crate) fn factor_plan(
    spec: &ScenarioSpec,
    w1_size: usize,
    w2_size: usize,
) -> Result<FactorPlan> {
    let scenario = spec.scenario();
    let (w1_size, w2_size) = match scenario {
        Scenario::PerfectChannel | Scenario::StrictlyCausalEncoding => {
            (spec.x_axis().size, w2_size)
        }
        Scenario::Lossless => (w1_size, spec.u_axis().size),
        Scenario::StrictlyCausalDecoding => (w1_size, spec.v_axis().size),
        _ => (w1_size, w2_size),
    };
    if w1_size == 0 || w2_size == 0 {
        return Err(Error::InvalidConfig(
            "auxiliary alphabets must be nonempty".to_string(),
        ));
    }
    let axes = vec![
        spec.u_axis().clone(),
        spec.s_axis().clone(),
        spec.z_axis().clone(),
        Alphabet::new(axis::W1, w1_size),
        Alphabet::new(axis::W2, w2_size),
        spec.x_axis().clone(),
        spec.y_axis().clone(),
        spec.v_axis().clone(),
    ];
    let mut fixed = vec![
        Factor::from_table(&axes, &[P_U, P_S, P_Z], spec.source().probs().to_vec())?,
        Factor::from_kernel(&axes, &[P_X, P_S], &[P_Y], spec.channel())?,
    ];
    let slots = match scenario {
        Scenario::Noncausal => vec![
            SlotSpec::new("codeword_encoder", &[P_U, P_S], &[P_X, P_W1, P_W2]),
            SlotSpec::new("codeword_decoder", &[P_Y, P_Z, P_W1, P_W2], &[P_V]),
        ],
        Scenario::CausalDecoding => vec![
            SlotSpec::new("codeword_encoder", &[P_U, P_S], &[P_X, P_W1, P_W2]),
            SlotSpec::new("codeword_decoder", &[P_Y, P_Z, P_W2], &[P_V]),
        ],
        Scenario::StrictlyCausalDecoding => {
            fixed.push(Factor::coupling(&axes, P_W2, P_V)?);
            vec![SlotSpec::new(
                "codeword_encoder",
                &[P_U, P_S],
                &[P_X, P_W1, P_W2],
            )]
        }
        Scenario::PerfectChannel => {
            fixed.push(Factor::from_kernel(
                &axes,
                &[P_U, P_S],
                &[P_X],
                spec.target_encoder(),
            )?);
            fixed.push(Factor::coupling(&axes, P_W1, P_X)?);
            vec![
                SlotSpec::new("state_description", &[P_U, P_S, P_X], &[P_W2]),
                SlotSpec::new("codeword_decoder", &[P_X, P_Z, P_W2], &[P_V]),
            ]
        }
        Scenario::Lossless => {
            fixed.push(Factor::coupling(&axes, P_U, P_W2)?);
            fixed.push(Factor::coupling(&axes, P_U, P_V)?);
            vec![SlotSpec::new("codeword_encoder", &[P_U, P_S], &[P_X, P_W1])]
        }
        Scenario::Independent => vec![
            SlotSpec::new("source_description", &[P_U], &[P_W2]),
            SlotSpec::new("source_decoder", &[P_Z, P_W2], &[P_V]),
            SlotSpec::new("channel_encoder", &[P_S], &[P_X, P_W1]),
        ],
        Scenario::CausalEncoding => vec![
            SlotSpec::new("codeword_prior", &[], &[P_W1]),
            SlotSpec::new("description", &[P_U, P_S, P_W1], &[P_W2]),
            SlotSpec::new("channel_input", &[P_U, P_S, P_W1], &[P_X]),
            SlotSpec::new("codeword_decoder", &[P_Y, P_Z, P_W1, P_W2], &[P_V]),
        ],
        Scenario::StrictlyCausalEncoding => {
            fixed.push(Factor::coupling(&axes, P_W1, P_X)?);
            vec![
                SlotSpec::new("channel_input", &[], &[P_X]),
                SlotSpec::new("description", &[P_U, P_S, P_X], &[P_W2]),
                SlotSpec::new("codeword_decoder", &[P_Y, P_Z, P_X, P_W2], &[P_V]),
            ]
        }
    };
    Ok(FactorPlan { axes, fixed, slots })
}

/// Auxiliary alphabet sizes declared by a scheme's kernels. Tied axes
/// report the size of the variable they are tied to.
fn aux_sizes(spec: &ScenarioSpec, aux: &AuxScheme) -> Result<(usize, usize)> {
    let w1 = match aux.scenario() {
        Scenario::Noncausal | Scenario::CausalDecoding | Scenario::StrictlyCausalDecoding => {
            aux.factor("codeword_encoder")?.axes()[1].size
        }
        Scenario::CausalEncoding => aux.factor("codeword_prior")?.axes()[0].size,
        Scenario::PerfectChannel | Scenario::StrictlyCausalEncoding => spec.x_axis().size,
        Scenario::Lossless => aux.factor("codeword_encoder")?.axes()[1].size,
        Scenario::Independent => aux.factor("channel_encoder")?.axes()[1].size,
    };
    let w2 = match aux.scenario() {
        Scenario::Noncausal | Scenario::CausalDecoding | Scenario::StrictlyCausalDecoding => {
            aux.factor("codeword_encoder")?.axes()[2].size
        }
        Scenario::CausalEncoding | Scenario::StrictlyCausalEncoding => {
            aux.factor("description")?.axes()[0].size
        }
        Scenario::PerfectChannel => aux.factor("state_description")?.axes()[0].size,
        Scenario::Lossless => spec.u_axis().size,
        Scenario::Independent => aux.factor("source_description")?.axes()[0].size,
    };
    Ok((w1, w2))
}

/// The joint law of (U,S,Z,W1,W2,X,Y,V) induced by running the scheme on
/// the spec's source and channel.
pub fn assemble_joint(spec: &ScenarioSpec, aux: &AuxScheme) -> Result<JointDistribution> {
    if aux.scenario() != spec.scenario() {
        return Err(Error::InvalidConfig(format!(
            "scheme is for {}, spec is for {}",
            aux.scenario(),
            spec.scenario()
        )));
    }
    let (w1, w2) = aux_sizes(spec, aux)?;
    let plan = factor_plan(spec, w1, w2)?;
    let mut factors = plan.fixed;
    for slot in &plan.slots {
        factors.push(Factor::from_kernel(
            &plan.axes,
            &slot.given_pos,
            &slot.out_pos,
            aux.factor(slot.name)?,
        )?);
    }
    product_over(plan.axes, &factors)
}
