//! Deterministic seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator whose seed is
//! derived from a user seed and a list of stream coordinates (purpose tag,
//! step, row, ...). Streams are therefore reproducible without carrying
//! generator state around, and independent work items can be processed in
//! any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TAG_MASK: u64 = 0x6d61_736b;
pub const TAG_DROPOUT: u64 = 0x6472_6f70;
pub const TAG_ORDER: u64 = 0x6f72_6472;
pub const TAG_INIT: u64 = 0x696e_6974;
pub const TAG_DEV: u64 = 0x6465_7620;
pub const TAG_SHUFFLE: u64 = 0x7368_7566;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a base seed with stream coordinates into a new 64-bit seed.
pub fn mix(seed: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(seed), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

pub fn rng(seed: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, coords))
}
