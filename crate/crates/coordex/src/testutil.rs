//! Shared helpers for unit tests: seeded randomness, small fixtures and
//! direct-summation oracles kept independent of the library's
//! marginalization and entropy code.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::prob::{Alphabet, ConditionalKernel, JointDistribution};
use crate::scenario::{AuxScheme, Scenario, ScenarioSpec};

/// Entropy of a group of axes, by hash-map accumulation over raw cells.
pub(crate) fn entropy_oracle(joint: &JointDistribution, group: &[&str]) -> f64 {
    let names: Vec<&str> = joint.axes().iter().map(|a| a.name.as_str()).collect();
    let sizes: Vec<usize> = joint.axes().iter().map(|a| a.size).collect();
    let pos: Vec<usize> = group
        .iter()
        .map(|g| names.iter().position(|n| n == g).unwrap())
        .collect();
    let mut acc: HashMap<Vec<usize>, f64> = HashMap::new();
    for (flat, &p) in joint.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut idx = vec![0usize; sizes.len()];
        let mut rest = flat;
        for d in (0..sizes.len()).rev() {
            idx[d] = rest % sizes[d];
            rest /= sizes[d];
        }
        let key: Vec<usize> = pos.iter().map(|&d| idx[d]).collect();
        *acc.entry(key).or_insert(0.0) += p;
    }
    -acc.values()
        .filter(|&&p| p > 1e-15)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// I(A;B|C) from entropies of merged groups.
pub(crate) fn cmi_oracle(
    joint: &JointDistribution,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> f64 {
    fn merge<'a>(x: &[&'a str], y: &[&'a str]) -> Vec<&'a str> {
        let mut m: Vec<&'a str> = x.to_vec();
        m.extend_from_slice(y);
        m
    }
    let h = |g: &[&str]| -> f64 {
        if g.is_empty() {
            0.0
        } else {
            entropy_oracle(joint, g)
        }
    };
    h(&merge(a, c)) + h(&merge(b, c)) - h(&merge(a, &merge(b, c))) - h(c)
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn random_simplex(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..k)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let sum: f64 = v.iter().sum();
    for p in &mut v {
        *p /= sum;
    }
    v
}

pub(crate) fn random_joint(rng: &mut impl Rng, axes: Vec<Alphabet>) -> JointDistribution {
    let cells: usize = axes.iter().map(|a| a.size).product();
    JointDistribution::new(axes, random_simplex(rng, cells)).unwrap()
}

pub(crate) fn random_kernel(
    rng: &mut impl Rng,
    given: Vec<Alphabet>,
    out: Vec<Alphabet>,
) -> ConditionalKernel {
    let rows: usize = given.iter().map(|a| a.size).product();
    let cols: usize = out.iter().map(|a| a.size).product();
    let mut probs = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        probs.extend(random_simplex(rng, cols));
    }
    ConditionalKernel::new(given, out, probs).unwrap()
}

pub(crate) fn binary(name: &str) -> Alphabet {
    Alphabet::new(name, 2)
}

/// All-binary noncausal spec with an xor encoder and a copy-Y decoder.
pub(crate) fn small_noncausal_spec() -> ScenarioSpec {
    let source = JointDistribution::new(
        vec![binary("U"), binary("S"), binary("Z")],
        vec![0.15, 0.1, 0.2, 0.05, 0.1, 0.1, 0.2, 0.1],
    )
    .unwrap();
    let channel = ConditionalKernel::new(
        vec![binary("X"), binary("S")],
        vec![binary("Y")],
        vec![0.9, 0.1, 0.8, 0.2, 0.1, 0.9, 0.3, 0.7],
    )
    .unwrap();
    let encoder = ConditionalKernel::deterministic(
        vec![binary("U"), binary("S")],
        vec![binary("X")],
        |g| vec![g[0] ^ g[1]],
    )
    .unwrap();
    let decoder = ConditionalKernel::deterministic(
        vec![binary("U"), binary("S"), binary("Z"), binary("X"), binary("Y")],
        vec![binary("V")],
        |g| vec![g[4]],
    )
    .unwrap();
    ScenarioSpec::new(Scenario::Noncausal, source, channel, encoder, decoder).unwrap()
}

pub(crate) fn random_noncausal_spec(rng: &mut impl Rng) -> ScenarioSpec {
    let source = random_joint(rng, vec![binary("U"), binary("S"), binary("Z")]);
    let channel = random_kernel(rng, vec![binary("X"), binary("S")], vec![binary("Y")]);
    let encoder = random_kernel(rng, vec![binary("U"), binary("S")], vec![binary("X")]);
    let decoder = random_kernel(
        rng,
        vec![binary("U"), binary("S"), binary("Z"), binary("X"), binary("Y")],
        vec![binary("V")],
    );
    ScenarioSpec::new(Scenario::Noncausal, source, channel, encoder, decoder).unwrap()
}

/// All-binary spec for any scenario tag, honoring the tag's constraints
/// (identity channel, copy decoder, product source, and so on).
pub(crate) fn random_spec(scenario: Scenario, rng: &mut impl Rng) -> ScenarioSpec {
    match scenario {
        Scenario::PerfectChannel => {
            let source = random_joint(rng, vec![binary("U"), binary("S"), binary("Z")]);
            let channel = ConditionalKernel::deterministic(
                vec![binary("X"), binary("S")],
                vec![binary("Y")],
                |g| vec![g[0]],
            )
            .unwrap();
            let encoder = random_kernel(rng, vec![binary("U"), binary("S")], vec![binary("X")]);
            let decoder = random_kernel(
                rng,
                vec![binary("U"), binary("S"), binary("Z"), binary("X"), binary("Y")],
                vec![binary("V")],
            );
            ScenarioSpec::new(scenario, source, channel, encoder, decoder).unwrap()
        }
        Scenario::Lossless => {
            let source = random_joint(rng, vec![binary("U"), binary("S"), binary("Z")]);
            let channel = random_kernel(rng, vec![binary("X"), binary("S")], vec![binary("Y")]);
            let encoder = random_kernel(rng, vec![binary("U"), binary("S")], vec![binary("X")]);
            let decoder = ConditionalKernel::deterministic(
                vec![binary("U"), binary("S"), binary("Z"), binary("X"), binary("Y")],
                vec![binary("V")],
                |g| vec![g[0]],
            )
            .unwrap();
            ScenarioSpec::new(scenario, source, channel, encoder, decoder).unwrap()
        }
        Scenario::Independent => {
            let uz = random_joint(rng, vec![binary("U"), binary("Z")]);
            let s = random_simplex(rng, 2);
            let mut probs = Vec::with_capacity(8);
            for u in 0..2 {
                for si in 0..2 {
                    for z in 0..2 {
                        probs.push(uz.get(&[u, z]) * s[si]);
                    }
                }
            }
            let source = JointDistribution::new(
                vec![binary("U"), binary("S"), binary("Z")],
                probs,
            )
            .unwrap();
            let channel = random_kernel(rng, vec![binary("X"), binary("S")], vec![binary("Y")]);
            // encoder rows vary only with s, decoder rows only with (u,z)
            let enc_rows: Vec<Vec<f64>> = (0..2).map(|_| random_simplex(rng, 2)).collect();
            let mut enc = Vec::new();
            for _u in 0..2 {
                for si in 0..2 {
                    enc.extend(&enc_rows[si]);
                }
            }
            let encoder = ConditionalKernel::new(
                vec![binary("U"), binary("S")],
                vec![binary("X")],
                enc,
            )
            .unwrap();
            let dec_rows: Vec<Vec<f64>> = (0..4).map(|_| random_simplex(rng, 2)).collect();
            let mut dec = Vec::new();
            for u in 0..2usize {
                for _s in 0..2 {
                    for z in 0..2usize {
                        for _x in 0..2 {
                            for _y in 0..2 {
                                dec.extend(&dec_rows[u * 2 + z]);
                            }
                        }
                    }
                }
            }
            let decoder = ConditionalKernel::new(
                vec![binary("U"), binary("S"), binary("Z"), binary("X"), binary("Y")],
                vec![binary("V")],
                dec,
            )
            .unwrap();
            ScenarioSpec::new(scenario, source, channel, encoder, decoder).unwrap()
        }
        _ => {
            let base = random_noncausal_spec(rng);
            ScenarioSpec::new(
                scenario,
                base.source().clone(),
                base.channel().clone(),
                base.target_encoder().clone(),
                base.target_decoder().clone(),
            )
            .unwrap()
        }
    }
}

/// Random scheme with the right factor shapes for the spec's scenario.
pub(crate) fn random_aux(
    rng: &mut impl Rng,
    spec: &ScenarioSpec,
    w1: usize,
    w2: usize,
) -> AuxScheme {
    let u = spec.u_axis().clone();
    let s = spec.s_axis().clone();
    let z = spec.z_axis().clone();
    let x = spec.x_axis().clone();
    let y = spec.y_axis().clone();
    let v = spec.v_axis().clone();
    let w1_ax = Alphabet::new("W1", w1);
    let w2_ax = Alphabet::new("W2", w2);
    match spec.scenario() {
        Scenario::Noncausal => random_noncausal_aux(rng, spec, w1, w2),
        Scenario::CausalDecoding => AuxScheme::CausalDecoding {
            codeword_encoder: random_kernel(
                rng,
                vec![u, s],
                vec![x, w1_ax, w2_ax.clone()],
            ),
            codeword_decoder: random_kernel(rng, vec![y, z, w2_ax], vec![v]),
        },
        Scenario::StrictlyCausalDecoding => AuxScheme::StrictlyCausalDecoding {
            codeword_encoder: random_kernel(
                rng,
                vec![u, s],
                vec![x, w1_ax, Alphabet::new("W2", v.size)],
            ),
        },
        Scenario::CausalEncoding => AuxScheme::CausalEncoding {
            codeword_prior: ConditionalKernel::new(
                vec![],
                vec![w1_ax.clone()],
                random_simplex(rng, w1),
            )
            .unwrap(),
            description: random_kernel(
                rng,
                vec![u.clone(), s.clone(), w1_ax.clone()],
                vec![w2_ax.clone()],
            ),
            channel_input: random_kernel(rng, vec![u, s, w1_ax.clone()], vec![x]),
            codeword_decoder: random_kernel(rng, vec![y, z, w1_ax, w2_ax], vec![v]),
        },
        Scenario::StrictlyCausalEncoding => AuxScheme::StrictlyCausalEncoding {
            channel_input: ConditionalKernel::new(
                vec![],
                vec![x.clone()],
                random_simplex(rng, x.size),
            )
            .unwrap(),
            description: random_kernel(
                rng,
                vec![u, s, x.clone()],
                vec![w2_ax.clone()],
            ),
            codeword_decoder: random_kernel(rng, vec![y, z, x, w2_ax], vec![v]),
        },
        Scenario::PerfectChannel => AuxScheme::PerfectChannel {
            state_description: random_kernel(
                rng,
                vec![u, s, x.clone()],
                vec![w2_ax.clone()],
            ),
            codeword_decoder: random_kernel(rng, vec![x, z, w2_ax], vec![v]),
        },
        Scenario::Lossless => AuxScheme::Lossless {
            codeword_encoder: random_kernel(rng, vec![u, s], vec![x, w1_ax]),
        },
        Scenario::Independent => AuxScheme::Independent {
            source_description: random_kernel(rng, vec![u], vec![w2_ax.clone()]),
            source_decoder: random_kernel(rng, vec![z, w2_ax], vec![v]),
            channel_encoder: random_kernel(rng, vec![s], vec![x, w1_ax]),
        },
    }
}

pub(crate) fn random_noncausal_aux(
    rng: &mut impl Rng,
    spec: &ScenarioSpec,
    w1: usize,
    w2: usize,
) -> AuxScheme {
    let codeword_encoder = random_kernel(
        rng,
        vec![spec.u_axis().clone(), spec.s_axis().clone()],
        vec![
            spec.x_axis().clone(),
            Alphabet::new("W1", w1),
            Alphabet::new("W2", w2),
        ],
    );
    let codeword_decoder = random_kernel(
        rng,
        vec![
            spec.y_axis().clone(),
            spec.z_axis().clone(),
            Alphabet::new("W1", w1),
            Alphabet::new("W2", w2),
        ],
        vec![spec.v_axis().clone()],
    );
    AuxScheme::Noncausal {
        codeword_encoder,
        codeword_decoder,
    }
}
