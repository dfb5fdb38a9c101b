//! Keyed random streams.
//!
//! Every consumer of randomness derives its own ChaCha stream from the root
//! seed and a small key (purpose tag, iteration, env index, ...). Streams are
//! therefore independent of evaluation order, which keeps parallel execution
//! and checkpoint/resume bit-exact without persisting generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags for keyed streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    EnvReset = 2,
    Action = 3,
    Expert = 4,
    Shuffle = 5,
    Preload = 6,
    Analysis = 7,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Stream for `(seed, purpose, a, b)`.
pub fn stream(seed: u64, purpose: Stream, a: u64, b: u64) -> StreamRng {
    let mut key = splitmix(seed);
    key = splitmix(key ^ purpose as u64);
    key = splitmix(key ^ a);
    key = splitmix(key ^ b.rotate_left(17));
    ChaCha8Rng::seed_from_u64(key)
}
