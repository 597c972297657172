//! Deterministic stream derivation for the simulator.
//!
//! Every random object gets its own generator, derived from the root
//! seed and a coordinate triple. Trials and codewords therefore do not
//! share state: results are independent of scheduling, codebooks have
//! the prefix property under rate growth, and an external oracle can
//! reproduce any single stream from the seed alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream family for per-trial randomness.
pub const TAG_TRIAL: u64 = 0x7472_6961_6c73_0001;

/// Stream family for codeword generation; coordinate `a` is the outer
/// index, `b` is 0 for the outer pair and `m_hat + 1` for nested
/// entries.
pub const TAG_CODEBOOK: u64 = 0x636f_6465_626b_0002;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for cell (tag, a, b) of the root seed's stream tree.
pub fn substream(seed: u64, tag: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut s = splitmix64(seed ^ tag);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    ChaCha8Rng::seed_from_u64(s)
}

/// Inverse-CDF draw over an unnormalized-tolerant probability row,
/// consuming exactly one uniform.
pub fn draw_index<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}
