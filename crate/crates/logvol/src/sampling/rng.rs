//! Reproducible stream-splitting RNG.
//!
//! A counter-based ChaCha generator keyed from (seed, stream_id) hands out
//! one independent substream per sample index, so batches are identical no
//! matter how work is sliced across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifies one logical random stream. Distinct `stream_id`s under the same
/// seed give statistically independent draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// A stream with the same seed but a different stream id.
    pub fn with_stream(&self, stream_id: u64) -> Self {
        RngStream { seed: self.seed, stream_id }
    }

    /// Generator for one sample index. Two seed/stream hash chains are mixed
    /// into the ChaCha key; the index selects the ChaCha counter stream, so
    /// substreams never overlap.
    pub fn substream(&self, index: u64) -> ChaCha8Rng {
        let mut a = self.seed ^ 0x243F_6A88_85A3_08D3;
        let mut b = self.stream_id ^ 0x4528_21E6_38D0_1377;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            let word = splitmix64(&mut a) ^ splitmix64(&mut b).rotate_left(17);
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index.into());
        rng
    }

    /// Generator for scalar use (substream 0).
    pub fn rng(&self) -> ChaCha8Rng {
        self.substream(0)
    }
}
