//! Deterministic seed derivation.
//!
//! Every random object in the crate is drawn from a stream keyed by a base
//! seed plus the object's coordinates (observation index, replica index,
//! experiment cell, ...). Streams are therefore independent of evaluation
//! order and of how work is split across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step, the standard 64-bit finalizing mixer.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Collapses a coordinate tuple into a single stream seed.
pub(crate) fn derive_seed(parts: &[u64]) -> u64 {
    let mut state = 0x5a17_ab1e_c0de_f00d_u64;
    let mut acc = 0_u64;
    for &p in parts {
        state ^= p.wrapping_mul(0x9e3779b97f4a7c15);
        acc = acc.rotate_left(23) ^ splitmix64(&mut state);
    }
    acc
}

/// A ChaCha stream for the given coordinates.
pub(crate) fn stream(parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(parts))
}
