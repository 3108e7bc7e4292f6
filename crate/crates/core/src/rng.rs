//! Reproducible random streams.
//!
//! A root seed is expanded into a ChaCha key; each `(path, substream)` pair
//! selects a distinct ChaCha stream id. Streams are fixed by their indices
//! alone, so paths can be drawn in any order or on any worker and adding a
//! new substream never shifts the draws of an existing one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Substream {
    Count = 0,
    Time = 1,
    Mixing = 2,
    Jump = 3,
    Gaussian = 4,
    Aux = 5,
}

const SUBSTREAMS: u64 = 8;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    out
}

/// Independent generator for one substream of one path.
pub fn stream(seed: u64, path: u64, sub: Substream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key(seed));
    rng.set_stream(path.wrapping_mul(SUBSTREAMS).wrapping_add(sub as u64));
    rng
}
