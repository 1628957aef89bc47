//! Deterministic seed derivation.
//!
//! Every random stream in the toolkit is a `ChaCha8Rng` seeded from a base
//! seed mixed with the coordinates of the work item (client, round, ...), so
//! results never depend on thread scheduling or call order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `base` with each component in order.
pub fn derive_seed(base: u64, components: &[u64]) -> u64 {
    components
        .iter()
        .fold(splitmix64(base), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

pub fn rng_for(base: u64, components: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, components))
}

/// Stream tags keep unrelated consumers of the same base seed apart.
pub(crate) mod stream {
    pub const INIT: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const PARTITION: u64 = 3;
    pub const SELECT: u64 = 4;
    pub const LOCAL_TRAIN: u64 = 5;
    pub const SYNTHETIC: u64 = 6;
}
