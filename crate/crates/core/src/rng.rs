//! Counter-based, keyed random streams.
//!
//! Every consumer derives its stream from `(seed, key)` so results never
//! depend on the order in which vertices are visited.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream dedicated to `key` under `seed`.
pub fn keyed_rng(seed: u64, key: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    rng
}

/// Domain-separated seed, so that two subsystems sharing a user seed
/// (e.g. the generator and the sampler) do not draw identical streams.
pub fn derive_seed(seed: u64, domain: u64) -> u64 {
    splitmix64(seed ^ splitmix64(domain))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministic permutation of `items` keyed by `(seed, key)`.
pub fn keyed_shuffle<T>(items: &mut [T], seed: u64, key: u64) {
    items.shuffle(&mut keyed_rng(seed, key));
}

pub(crate) mod domain {
    pub const RANDOM_GRAPH: u64 = 1;
    pub const PLANTED_GRAPH: u64 = 2;
    pub const RANDOM_PARTITION: u64 = 3;
    pub const EAS_FANOUT: u64 = 4;
    pub const LAYER_FANOUT: u64 = 5;
    pub const FEATURES: u64 = 6;
    pub const WEIGHTS: u64 = 7;
}
