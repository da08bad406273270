//! Seed derivation. Every random consumer gets its own ChaCha stream keyed by
//! a path of integers, so results never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `seed` and a key path.
pub fn substream(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// Stable 64-bit key for a label, used to key substreams by name.
pub fn label_key(label: &str) -> u64 {
    // FNV-1a
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
