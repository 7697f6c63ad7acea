//! Keyed random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 generator whose
//! seed is a pure function of a master seed and a short key path (run index,
//! grid index, replicate index, ...). Work items therefore own their stream
//! and results do not depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Key namespaces, so that e.g. replicate 3 and fold plan 3 never collide.
pub mod purpose {
    pub const DATA: u64 = 0xDA7A;
    pub const BOOT_VAR: u64 = 0xB007;
    pub const BOOT_CI: u64 = 0xC1C1;
    pub const FOLDS: u64 = 0xF01D;
    pub const REPLICATE: u64 = 0x5EED;
    pub const INNER: u64 = 0x1AAE;
    pub const THEORY: u64 = 0x7E0;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a key path into a single 64-bit seed.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// Generator for the stream addressed by `(seed, keys)`.
pub fn stream(seed: u64, keys: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, keys))
}
