//! Named random sub-streams derived from one run seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn stream_id(name: &str) -> u64 {
    // FNV-1a; stable across platforms and releases
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(name));
    rng
}

/// A 64-bit seed for components that take a plain seed.
pub fn sub_seed(seed: u64, name: &str) -> u64 {
    stream(seed, name).next_u64()
}
