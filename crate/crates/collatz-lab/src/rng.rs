//! Deterministic RNG streams.
//!
//! Every simulation draws from a ChaCha8 stream keyed by (master seed,
//! stream id). Stream ids are assigned by trial or by seed, never by worker,
//! so results are identical for any degree of parallelism.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One independent, reproducible stream.
///
/// The master seed keys the cipher; the stream id selects a disjoint
/// keystream, so `(master, id)` pairs never collide across trials.
pub fn stream(master_seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}
