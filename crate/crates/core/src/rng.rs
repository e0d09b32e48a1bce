//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by
//! `(seed, purpose, index, step)`. The key is derived from the seed and the
//! purpose, the ChaCha stream id is the element index (usually a pixel or
//! sample index) and the block position is derived from the step. Two draws
//! with the same address are identical no matter which thread makes them or
//! in which order, which is what makes pixel-parallel runs reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share key material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    SaltPepper = 1,
    Speckle = 2,
    MeasurementNoise = 3,
    StateNoise = 4,
    ControlLoop = 5,
    Synthetic = 6,
    Estimation = 7,
    ControlLoopState = 8,
}

/// Words reserved per step inside one stream.
const WORDS_PER_STEP: u128 = 1 << 24;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Opens the stream at `(seed, purpose, index, step)`.
pub fn stream(seed: u64, purpose: Purpose, index: u64, step: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = seed ^ splitmix64(purpose as u64);
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng.set_word_pos(step as u128 * WORDS_PER_STEP);
    rng
}

/// Handle bound to a seed and purpose; hands out per-element streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFamily {
    pub seed: u64,
    pub purpose: Purpose,
}

impl StreamFamily {
    pub fn new(seed: u64, purpose: Purpose) -> Self {
        Self { seed, purpose }
    }

    pub fn at(&self, index: u64, step: u64) -> ChaCha8Rng {
        stream(self.seed, self.purpose, index, step)
    }
}
