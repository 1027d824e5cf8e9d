//! Seeded random source used by the simulator and the data splitter.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded from a `u64`
//! via `SeedableRng::seed_from_u64`. ChaCha output is specified and portable,
//! so a given seed yields the same stream on every platform and release.
//! Sub-task seeds come from [`derive_seed`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Explicitly threaded generator state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngState(ChaCha8Rng);

impl RngState {
    pub fn seeded(seed: u64) -> Self {
        RngState(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform draw on `[lo, hi)`; returns `lo` when `lo == hi`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::invalid(format!("uniform bounds must be finite, got [{lo}, {hi})")));
        }
        if lo > hi {
            return Err(Error::invalid(format!("uniform range is empty: lo {lo} > hi {hi}")));
        }
        if lo == hi {
            return Ok(lo);
        }
        Ok(self.0.random_range(lo..hi))
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.0)
    }

    /// Uniform index in `0..n` (`n > 0`).
    pub fn index(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}

/// Value-passing form of [`RngState::uniform`].
pub fn rng_uniform(mut state: RngState, lo: f64, hi: f64) -> Result<(f64, RngState)> {
    let v = state.uniform(lo, hi)?;
    Ok((v, state))
}

/// Derives an independent seed for a named sub-task.
///
/// `splitmix64(seed ^ fnv1a64(tag) ^ splitmix64(index))`. Changing the tag or
/// index gives an unrelated stream; the same triple always gives the same seed.
pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(seed ^ h ^ splitmix64(index))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
