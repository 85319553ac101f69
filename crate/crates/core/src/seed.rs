//! Deterministic derivation of independent RNG seeds.
//!
//! Seeds form a tree: master seed → cell → run → stream. Each level mixes the
//! parent seed with a key through SplitMix64's finalizer, so a stream depends
//! only on its path and never on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed of `parent` for `key`.
pub fn derive(parent: u64, key: u64) -> u64 {
    mix64(mix64(parent) ^ key.rotate_left(17) ^ 0xD6E8_FEB8_6659_FD93)
}

/// Child seed of `parent` for a sequence of keys.
pub fn derive_path(parent: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(parent, |s, &k| derive(s, k))
}

/// Named random streams inside one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Environment = 0,
    Seller = 1,
    Buyer = 2,
}

pub fn run_seed(master_seed: u64, run_index: u64) -> u64 {
    derive(master_seed, run_index)
}

pub fn stream_rng(run_seed: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(run_seed, stream as u64))
}
