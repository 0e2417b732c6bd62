//! Reproducible random-number substreams.
//!
//! Replicated computations (study replications, bootstrap resamples)
//! derive one independent substream per work item from a single root
//! seed. The split is counter-based: substream `k` of root seed `s` is
//! the ChaCha stream with seed `s` and stream id `k`. Draws are therefore
//! bit-stable no matter how the work items are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Root generator for a seed (substream 0).
pub fn root(seed: u64) -> Stream {
    substream(seed, 0)
}

/// Independent substream `stream` of root seed `seed`.
pub fn substream(seed: u64, stream: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
