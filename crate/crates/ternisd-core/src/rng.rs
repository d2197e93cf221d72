//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by `(seed, tag)`, so equal seeds
//! used for different purposes yield unrelated streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for `(seed, tag)`.
pub fn stream(seed: u64, tag: &str) -> StreamRng {
    let mut h = splitmix64(seed);
    for b in tag.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_mut(8).enumerate() {
        chunk.copy_from_slice(&splitmix64(h.wrapping_add(i as u64)).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Sub-stream `index` of `(seed, tag)`, used for per-restart randomness.
pub fn substream(seed: u64, tag: &str, index: u64) -> StreamRng {
    let mut r = stream(seed, tag);
    r.set_stream(index);
    r
}
