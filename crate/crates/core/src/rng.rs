//! Deterministic RNG plumbing shared by the phantom generator, the learners
//! and the CNN trainer.
//!
//! The repo-wide PRNG contract is ChaCha8 seeded through `seed_from_u64`,
//! which is documented and stable across platforms. Per-task seeds are
//! derived from a master seed with a SplitMix64-style mix so tasks can run
//! in any order (or in parallel) without changing the stream each one sees.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer. Bijective on u64.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for task `index` from `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

/// The repo-wide deterministic generator.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
