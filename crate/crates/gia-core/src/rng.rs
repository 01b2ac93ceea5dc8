//! Deterministic seed derivation.
//!
//! Every random decision in the pipeline draws from a ChaCha stream whose
//! seed is derived from (base seed, trial index, purpose tag). Re-running any
//! component in isolation reproduces its stream exactly.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives a stream seed from the run's base seed, the trial counter and a
/// purpose tag such as `"splits"` or `"victim"`.
pub fn derive_seed(base: u64, trial: u64, purpose: &str) -> u64 {
    splitmix64(base ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ fnv1a(purpose))
}

/// Seeded generator used everywhere randomness is needed.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
