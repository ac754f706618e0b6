//! Seeded random number generation.
//!
//! Everything that draws randomness in this crate goes through a
//! [`ChaCha8Rng`] built here, so results are reproducible across runs and
//! platforms for a fixed seed. Independent tasks (one-vs-rest classifiers,
//! forest trees) derive their own stream seeds from the master seed so they
//! can be trained in any order without changing the outcome.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default seed used across the crate when none is configured.
pub const DEFAULT_SEED: u64 = 42;

/// Build a portable seeded generator.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive a stream seed from a master seed, stable across platforms.
///
/// Uses a splitmix64 finalizer so nearby `(master, stream)` pairs produce
/// unrelated seeds.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
