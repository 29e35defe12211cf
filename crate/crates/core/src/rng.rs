//! Deterministic seeding and disorder sampling.
//!
//! Every random object is a pure function of a user seed and an index, so runs
//! are reproducible regardless of thread count or evaluation order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Label;

/// SplitMix64 finaliser.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `index` under the user seed `seed`:
/// `splitmix64(seed ^ splitmix64(index))`.
#[inline]
pub fn replica_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Uniform in `[0, 1)` attached to lattice site `(i, j)` of replica stream `stream`.
#[inline]
pub fn site_uniform(stream: u64, i: i64, j: i64) -> f64 {
    let h = splitmix64(stream ^ splitmix64((i as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ (j as u64)));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Fair-coin monomer sequence of length `n`, drawn from ChaCha8 seeded by `seed`.
pub fn monomer_sequence(seed: u64, n: usize) -> Vec<Label> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut word = rng.next_u64();
        for _ in 0..64 {
            if out.len() == n {
                break;
            }
            out.push(if word & 1 == 1 { Label::A } else { Label::B });
            word >>= 1;
        }
    }
    out
}
