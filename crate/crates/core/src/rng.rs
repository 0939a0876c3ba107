//! Seeded random numbers.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded from a single
//! `u64` via `seed_from_u64`. rand_chacha guarantees a stable output stream for
//! a given seed across releases. Everything layered on top of the raw `u64`
//! stream (unit floats, bounded integers, shuffles) is implemented here so no
//! distribution code from another crate can shift the stream.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    draws: u64,
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            draws: 0,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of `u64` words consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn unit<T: Scalar>(&mut self) -> T {
        T::lit(self.unit_f64())
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform<T: Scalar>(&mut self, lo: T, hi: T) -> T {
        lo + (hi - lo) * self.unit::<T>()
    }

    /// Uniform integer in `[0, n)` by rejection sampling (no modulo bias).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    /// Standard normal via Box-Muller.
    pub fn normal_f64(&mut self) -> f64 {
        let u1 = 1.0 - self.unit_f64();
        let u2 = self.unit_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<E>(&mut self, items: &mut [E]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// A uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}
