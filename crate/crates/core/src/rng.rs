//! Seeded random streams. Every random draw in the crate comes from a
//! ChaCha8 generator keyed by the user seed and a fixed stream id, so results
//! depend only on `(seed, stream)` and never on thread scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub const STREAM_ENSEMBLE: u64 = 1;
pub const STREAM_FOLDS: u64 = 2;
pub const STREAM_PD_SAMPLE: u64 = 3;
pub const STREAM_NULL: u64 = 4;
pub const STREAM_SYNTH: u64 = 5;
pub const STREAM_NOISE: u64 = 6;

pub fn stream(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A child seed, e.g. for the `rep`-th bootstrap refit.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag.wrapping_add(1 << 32));
    rng.next_u64()
}
