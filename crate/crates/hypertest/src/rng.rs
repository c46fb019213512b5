//! Deterministic replicate streams.
//!
//! Every Monte-Carlo replicate draws from its own counter-based stream keyed
//! by `(seed, index)`, so results are independent of scheduling and of how
//! work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG used throughout: fast, seedable, with 2^64 independent streams.
pub type ReplicateRng = ChaCha8Rng;

/// Stream for replicate `index` under master `seed`. Distinct indices give
/// statistically independent streams; the same pair always replays the same
/// sequence.
pub fn replicate_rng(seed: u64, index: u64) -> ReplicateRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
