//! Seed derivation for reproducible, independently keyed random streams.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// The generator used throughout the simulator.
pub type SimRng = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator keyed by `(seed, stream, keys...)`.
///
/// Distinct key tuples give statistically independent streams, so a draw
/// for `(step, rollout)` never depends on how many draws happened elsewhere.
pub fn keyed(seed: u64, stream: u64, keys: &[u64]) -> SimRng {
    let mut h = splitmix64(seed ^ splitmix64(stream));
    for &k in keys {
        h = splitmix64(h ^ splitmix64(k.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    SimRng::seed_from_u64(h)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
