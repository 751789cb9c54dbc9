//! Seeded, counter-based randomness.
//!
//! Every stochastic routine takes an explicit 64-bit seed and derives
//! ChaCha8 streams from it, so runs are bit-reproducible and independent
//! work items (trials, repetitions, grid points) can run in parallel
//! without sharing generator state.

use rand_chacha::rand_core::{RngCore, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; mixes a seed with a stream tag.
pub fn mix(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 stream `index` of the generator family keyed by `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform draw from `0..2^bits` (bit-masked, exactly uniform).
pub fn uniform_bits(rng: &mut ChaCha8Rng, bits: usize) -> u64 {
    debug_assert!(bits > 0 && bits <= 64);
    if bits == 64 {
        rng.next_u64()
    } else {
        rng.next_u64() & ((1u64 << bits) - 1)
    }
}

/// Uniform f64 in [0, 1) from the top 53 bits.
pub fn uniform_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
