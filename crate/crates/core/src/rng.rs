//! Deterministic pseudo-random stream.
//!
//! Backed by ChaCha8 (`rand_chacha` 0.3), seeded through
//! `SeedableRng::seed_from_u64`. Both the cipher and the seed expansion are
//! value-stable across platforms and crate patch releases, so a given seed
//! reproduces every draw bit for bit.

use std::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Name recorded in output headers.
pub const PRNG_NAME: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;
const INV_2_52: f64 = 1.0 / (1u64 << 52) as f64;

#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
    seed: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in the open interval (0, 1): a 52-bit grid shifted by half a
    /// step, so neither endpoint can occur (the top value is `1 − 2⁻⁵³`).
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 12) as f64 + 0.5) * INV_2_52
    }

    /// Uniform angle in [0, 2π).
    pub fn uniform_angle(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_53 * TAU
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for grid point `index` of a sweep: the `index + 1`-th SplitMix64
/// output starting from `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    mix64(base.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}
