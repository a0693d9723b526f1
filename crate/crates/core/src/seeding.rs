//! Deterministic random streams.
//!
//! Every random object in the crate is drawn from a [`ChaCha8Rng`] seeded with
//! `seed_from_u64`. Independent substreams (one per trial, or one per purpose)
//! get their own 64-bit seed from [`derive_seed`], a SplitMix64 finalizer over
//! `(master, index)`. A trial's randomness therefore depends only on the master
//! seed and the trial index, never on the thread that happens to run it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for all draws.
pub type SketchRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of substream `index` under `master`:
/// `splitmix64(splitmix64(master) + (index + 1) · γ)` with γ the 64-bit golden ratio.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master).wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> SketchRng {
    SketchRng::seed_from_u64(seed)
}

/// Generator for substream `index` of `master`.
pub fn substream(master: u64, index: u64) -> SketchRng {
    rng_from_seed(derive_seed(master, index))
}

/// Fixed purpose tags, so that e.g. the test matrix and trial 0 of an
/// experiment never share a stream.
pub(crate) mod purpose {
    pub const TEST_MATRIX: u64 = 0x5445_5354_4D41_5458;
    pub const TEST_VECTOR: u64 = 0x5445_5354_5645_4354;
    pub const TRIALS: u64 = 0x5452_4941_4C53_0000;
}

/// Seed of trial `trial` in an experiment keyed by `master`.
pub(crate) fn trial_seed(master: u64, trial: u64) -> u64 {
    derive_seed(derive_seed(master, purpose::TRIALS), trial)
}
