//! Deterministic RNG utilities.
//!
//! All randomness in the crate flows through seeded `ChaCha8Rng` streams so
//! that every generator, training run, and experiment is reproducible from
//! its seeds alone. Workers derive disjoint streams with [`mix`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Create a deterministic RNG from a seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mix two seeds into one (splitmix64 finalizer over the pair).
///
/// Used to derive per-worker / per-sample streams from a master seed without
/// stream overlap, so parallel evaluation order cannot change results.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
