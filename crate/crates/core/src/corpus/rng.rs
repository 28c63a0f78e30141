//! Seed derivation and shuffling for fold plans.
//!
//! Every random stream is a SplitMix64 generator (Steele, Lea & Flood 2014)
//! whose initial state is derived from the run seed and a tuple of stream
//! coordinates through the SplitMix64 output finalizer. The bounded draw uses
//! rejection sampling, so results do not depend on any library's
//! range-sampling internals.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream domain for the per-class fold shuffle.
pub(crate) const FOLD_DOMAIN: u64 = 0x464f_4c44; // "FOLD"
/// Stream domain for the per-class validation carve-out.
pub(crate) const VALIDATION_DOMAIN: u64 = 0x5641_4c49; // "VALI"

/// SplitMix64 output finalizer.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn derive_seed(seed: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(mix64(seed), |acc, &c| {
        mix64(acc ^ mix64(c.wrapping_add(GOLDEN_GAMMA)))
    })
}

pub(crate) fn stream(seed: u64, coords: &[u64]) -> SplitMix64 {
    SplitMix64::seed_from_u64(derive_seed(seed, coords))
}

/// Uniform draw in `0..bound` by rejection; `bound` must be non-zero.
pub(crate) fn below(rng: &mut SplitMix64, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let limit = u64::MAX - u64::MAX % bound;
    loop {
        let r = rng.next_u64();
        if r < limit {
            return r % bound;
        }
    }
}

/// Fisher-Yates, walking from the back.
pub(crate) fn shuffle<T>(rng: &mut SplitMix64, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}
