//! Counter-based random substreams.
//!
//! Every draw gets its own generator keyed by `(seed, source, index)`, so the
//! outcome of a run does not depend on how draws are scheduled across
//! workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes the three coordinates into a 64-bit key.
pub fn stream_key(seed: u64, source: u64, index: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ source) ^ index)
}

pub fn substream(seed: u64, source: u64, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, source, index))
}
