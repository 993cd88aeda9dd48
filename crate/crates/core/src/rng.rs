//! Seeded random streams.
//!
//! Every stochastic component draws from a ChaCha8 generator whose seed is
//! derived from a base seed and a path of tags. Two different paths give
//! statistically independent streams, so work can be split across threads
//! without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags used across the crate.
pub mod tag {
    pub const LOCATIONS: u64 = 0x10;
    pub const DURATIONS: u64 = 0x11;
    pub const WINDOWS: u64 = 0x12;
    pub const SKILLS: u64 = 0x13;
    pub const DEMANDS: u64 = 0x14;
    pub const SIZES: u64 = 0x15;
    pub const INITIAL: u64 = 0x20;
    pub const SEARCH: u64 = 0x21;
    pub const OFFSPRING: u64 = 0x22;
    pub const SCENARIO: u64 = 0x30;
    pub const REFERENCE: u64 = 0x31;
    pub const NSGA2: u64 = 0x40;
    pub const MOEAD: u64 = 0x41;
    pub const FILL: u64 = 0x42;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a tag path into a single 64-bit seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for &t in path {
        h = splitmix64(h ^ splitmix64(t.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

/// Generator for the stream identified by `seed` and `path`.
pub fn stream(seed: u64, path: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}
