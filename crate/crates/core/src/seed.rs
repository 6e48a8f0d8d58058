//! Counter-based seed derivation.
//!
//! Every random draw in the crate is keyed by `(seed, stream, index)`. Sample
//! `i` of a stream uses `seed ^ i` after the stream tag is folded in, so work
//! can be split across threads without changing any result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags separating independent uses of one master seed.
pub mod stream {
    pub const UNIT: u64 = 0;
    pub const ROTATION: u64 = 0x524f_5441_0000_0000;
    pub const COVERAGE: u64 = 0x434f_5645_0000_0000;
    pub const WITNESS: u64 = 0x5749_544e_0000_0000;
    pub const PROBE: u64 = 0x5052_4f42_0000_0000;
    pub const FUNCTIONAL: u64 = 0x4655_4e43_0000_0000;
    pub const PERTURB: u64 = 0x5045_5254_0000_0000;
    pub const PATTERN: u64 = 0x5041_5454_0000_0000;
}

/// Seed for sample `index` of `stream`.
pub fn derive(seed: u64, stream: u64, index: u64) -> u64 {
    (seed ^ stream) ^ index
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_for(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    rng(derive(seed, stream, index))
}
