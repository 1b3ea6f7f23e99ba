//! Seeded, stream-separated random number generation.
//!
//! Every random draw in the crate goes through [`RngSeed::rng`], which returns a
//! ChaCha8 generator keyed by the 64-bit seed and positioned on the requested
//! stream. Identical `(seed, stream_id)` pairs reproduce identical draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Stream purposes. A factor index is folded into the high bits by [`RngSeed::for_factor`].
pub mod stream {
    pub const GRAPH: u64 = 0;
    pub const DELETE: u64 = 1;
    pub const COUPLE: u64 = 2;
    pub const DISORDER: u64 = 3;
    pub const GRAPH_2: u64 = 4;
    pub const DELETE_2: u64 = 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        Self { stream_id, ..self }
    }

    /// Stream `purpose` of factor `factor`.
    pub fn for_factor(self, factor: usize, purpose: u64) -> Self {
        self.with_stream(((factor as u64) << 8) | (purpose & 0xff))
    }

    /// An independent seed for child `index`, e.g. one ensemble sample.
    pub fn derive(self, index: u64) -> Self {
        let mixed = splitmix64(self.seed ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        Self::new(splitmix64(mixed ^ self.stream_id))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        Self::new(seed)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
