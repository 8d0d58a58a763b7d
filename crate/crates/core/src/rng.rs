//! Seed derivation. Every random draw in the crate comes from a ChaCha8
//! stream whose seed is derived from one master seed and a path of task
//! tags, so results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Recorded in dataset metadata and run manifests.
pub const PRNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.9); seeds split by splitmix64 over (master, tag path); \
gaussian: rand_distr 0.5 StandardNormal; binomial: rand_distr 0.5 Binomial";

pub type StreamRng = ChaCha8Rng;

/// Tags for the top-level random domains.
pub mod tag {
    pub const NOISE: u64 = 0x6e6f_6973;
    pub const SEQUENCE: u64 = 0x7365_7175;
    pub const SHOTS: u64 = 0x7368_6f74;
    pub const MONTE_CARLO: u64 = 0x6d63_6d63;
    pub const PRESELECT: u64 = 0x7072_6573;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `seed = f(...f(f(master) ^ g(t0)) ^ g(t1)...)` with `f = g = splitmix64`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, path))
}
