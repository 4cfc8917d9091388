//! Portable seeded randomness.
//!
//! Every random draw in the crate goes through [`SeededRng`], a
//! xoshiro256** generator whose 256-bit state is expanded from a 64-bit seed
//! with SplitMix64 (the reference seeding procedure published with
//! xoshiro). On top of the raw 64-bit stream the crate defines its own
//! derived draws so that results are bit-identical across platforms and
//! across implementations in other languages:
//!
//! * bounded integers use Lemire's multiply-shift method with rejection
//!   (`next_below`);
//! * uniform reals on `[0, 1)` take the top 53 bits (`next_f64`);
//! * standard normals use the Box–Muller transform on two uniforms, one
//!   normal per pair of 64-bit draws (`next_gaussian`).

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

/// Seed-stream tag for additive measurement noise.
pub const NOISE_STREAM: u64 = 0x6e6f_6973_6500_0001;
/// Seed-stream tag for solver-internal start vectors.
pub const LANCZOS_STREAM: u64 = 0x6c61_6e63_7a6f_7301;

/// SplitMix64 finaliser, used to decorrelate derived seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for repeat `repeat` of grid cell `cell`:
/// `base_seed + mix64((cell << 32) | repeat)` (wrapping).
pub fn derive_seed(base_seed: u64, cell: u32, repeat: u32) -> u64 {
    base_seed.wrapping_add(mix64(((cell as u64) << 32) | repeat as u64))
}

/// Seed of an independent stream tagged `stream` derived from `seed`.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    mix64(seed ^ stream)
}

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: Xoshiro256StarStar,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..bound`. `bound` must be nonzero.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = (self.next_u64() as u128) * (bound as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Uniform real in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller (cosine branch only).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1]
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
