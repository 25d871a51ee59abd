//! Seeded random streams.
//!
//! Every randomized stage draws from its own named stream derived from one
//! root seed, so adding or reordering a consumer never shifts the randomness
//! seen by the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Derives the seed of a named sub-stream from a root seed.
///
/// FNV-1a over the label, then a splitmix64 finalizer over the combination.
/// Stable across platforms and releases.
pub fn stream_seed(root: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in label.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(root ^ h)
}

/// Deterministic generator for a named sub-stream.
pub fn stream_rng(root: u64, label: &str) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(stream_seed(root, label))
}

/// Deterministic generator straight from a seed.
pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
