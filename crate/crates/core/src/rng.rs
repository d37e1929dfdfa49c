//! Seeding conventions.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded with a
//! 64-bit integer. ChaCha is a counter-mode stream cipher, so a given seed
//! yields the same stream on every platform and independent of thread count.
//!
//! Two derivations are used:
//! - replicate `k` of a loop over a fixed base seed uses `base + k`
//!   ([`replicate_seed`]);
//! - experiment cells indexed by `(n, rep)` use `base ^ mix(n, rep)`
//!   ([`cell_seed`]), where `mix` is the SplitMix64 finalizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn replicate_seed(base: u64, k: u64) -> u64 {
    base.wrapping_add(k)
}

pub fn cell_seed(base: u64, n: usize, rep: usize) -> u64 {
    base ^ splitmix64(splitmix64(n as u64) ^ (rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Independent stream `stream` derived from `seed`.
pub fn substream(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
