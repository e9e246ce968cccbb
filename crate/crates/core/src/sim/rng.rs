//! Independent random streams split from one master seed.
//!
//! Every (owner, purpose) pair gets its own ChaCha8 generator so adding a
//! symbol or reordering work across threads never shifts another stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Arrivals = 1,
    Venues = 2,
    Quotes = 3,
    Prices = 4,
    Sizes = 5,
    Latency = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for `owner` (symbol index or link index) and `purpose`.
pub fn stream(seed: u64, owner: u64, purpose: Purpose) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(seed) ^ splitmix64(owner.wrapping_mul(8) ^ purpose as u64));
    ChaCha8Rng::seed_from_u64(key)
}
