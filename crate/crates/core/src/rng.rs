//! Seeded random streams.
//!
//! Every independent unit of work (a channel realization, an evaluation
//! episode) gets its own stream derived from a master seed by XOR with the
//! unit's index, so results do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Salts separating the seed domains of the experiment pipeline.
pub mod salt {
    pub const TRAIN: u64 = 0x5452_4149_4e00_0000;
    pub const EVAL_CHANNEL: u64 = 0x4556_4348_0000_0000;
    pub const EVAL_EPISODE: u64 = 0x4556_4550_0000_0000;
}

pub fn from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream for realization `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed ^ index)
}

/// SplitMix64 finalizer, used to turn structured keys into well-mixed words.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform in [0, 1) from the top 53 bits of a word.
pub(crate) fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
