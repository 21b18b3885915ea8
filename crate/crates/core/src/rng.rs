//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator seeded with `stream_seed(seed, path)`,
//! where `path` is a short list of integers naming the stream (member index,
//! trial index, attribute index, ...). `stream_seed` folds the path into the
//! seed with the SplitMix64 finalizer, so sibling streams are unrelated and a
//! stream's output never depends on how many other streams were drawn first.
//!
//! Uniform reals are produced from the top 53 bits of a 64-bit draw, giving
//! values in `[0, 1)`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream tags keep streams of different purposes apart even when their
/// indices coincide.
pub mod tag {
    pub const BAGGING: u64 = 1;
    pub const ADABOOST: u64 = 2;
    pub const FOREST: u64 = 3;
    pub const RANDOM_TREE: u64 = 4;
    pub const NOISE_SELECT: u64 = 5;
    pub const NOISE_VALUES: u64 = 6;
    pub const FOLDS: u64 = 7;
    pub const SYNTH: u64 = 8;
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(seed), |acc, &p| mix64(acc ^ mix64(p)))
}

pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, path))
}

/// Uniform in `[0, 1)`.
#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
