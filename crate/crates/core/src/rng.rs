//! Seeded random streams.
//!
//! Every stochastic component draws from its own stream, derived from a run
//! seed and a path of integer labels. Streams are independent of evaluation
//! order, so a simulation gives the same bytes whether its parts run
//! sequentially or in parallel.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// Generator used throughout the simulator.
pub type SimRng = Xoshiro256PlusPlus;

/// Stream labels for the top-level consumers of randomness.
pub mod tag {
    pub const PROTOTYPES: u64 = 1;
    pub const SUPPORTS: u64 = 2;
    pub const QUERIES: u64 = 3;
    pub const PROGRAMMING: u64 = 4;
    pub const READ: u64 = 5;
    pub const FROZEN_READ: u64 = 6;
    pub const CURVE: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a seed with a path of labels into a single 64-bit stream key.
pub fn stream_key(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p.wrapping_add(0x51))))
}

pub fn stream(seed: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(stream_key(seed, path))
}
