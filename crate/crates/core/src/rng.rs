//! Seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a 64-bit
//! value. Child seeds are derived from a parent seed and a list of counters
//! by folding each counter through SplitMix64:
//!
//! ```text
//! s_0 = parent
//! s_{k+1} = splitmix64(s_k ^ splitmix64(counter_k + 0x9E37_79B9_7F4A_7C15 * (k + 1)))
//! ```
//!
//! so `(master, cell, trial, role)` always maps to the same stream no matter
//! which thread consumes it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `parent` and a path of counters.
pub fn derive_seed(parent: u64, path: &[u64]) -> u64 {
    path.iter().enumerate().fold(parent, |acc, (k, &c)| {
        let salt = c.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k as u64 + 1));
        splitmix64(acc ^ splitmix64(salt))
    })
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream roles used when deriving seeds, kept distinct so that e.g. the
/// instance draw and the sample draw of one trial never share a stream.
pub mod role {
    pub const INSTANCE: u64 = 1;
    pub const SAMPLES: u64 = 2;
    pub const CALIBRATION: u64 = 3;
    pub const NULL: u64 = 4;
    pub const ALT: u64 = 5;
}
