//! Seeded random streams.
//!
//! `RandomStream` is a splitmix64 generator. Uniforms take the top 53 bits of
//! each 64-bit output. Gaussian draws use the Box–Muller cosine branch and
//! consume exactly two uniforms each, in the order `(u1, u2)`, with `u1`
//! mapped into `(0, 1]` so the logarithm is always finite. Nothing is cached
//! between calls, so the number of 64-bit outputs consumed by any sequence of
//! calls is fixed and the stream is reproducible across platforms.

use std::f64::consts::PI;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    state: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Derives an independent child stream. The parent is not advanced, so
    /// the child depends only on the parent's current state and the label.
    pub fn split(&self, label: &str) -> Self {
        Self {
            state: mix64(self.state ^ fnv1a(label)),
        }
    }

    /// Child stream for the `index`-th worker under `label`.
    pub fn split_indexed(&self, label: &str, index: u64) -> Self {
        let child = self.split(label);
        Self {
            state: mix64(child.state ^ mix64(index.wrapping_add(GOLDEN_GAMMA))),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer on `[0, n)`; `n` must be positive.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Standard normal draw.
    #[inline]
    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        box_muller(u1, u2)
    }

    pub fn gaussian_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.gaussian()).collect()
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}

/// Box–Muller cosine branch: `sqrt(-2 ln u1) * cos(2π u2)` for `u1 ∈ (0, 1]`.
#[inline]
pub fn box_muller(u1: f64, u2: f64) -> f64 {
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}
