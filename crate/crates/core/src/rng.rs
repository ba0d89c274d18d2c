//! Seeded randomness.
//!
//! Every run derives its generators from one 64-bit seed. Each consumer
//! (internal weights, input weights, feedback weights, trace sampling) gets
//! its own ChaCha8 stream selected by stream id, so the matrices do not
//! depend on the order in which they are drawn.

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Independent substreams of a run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Substream {
    Internal,
    Input,
    Feedback,
    Sampling,
}

impl Substream {
    fn id(self) -> u64 {
        match self {
            Substream::Internal => 1,
            Substream::Input => 2,
            Substream::Feedback => 3,
            Substream::Sampling => 4,
        }
    }
}

/// Seed holder that hands out independent, reproducible streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededRng {
    seed: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A fresh generator positioned at the start of `which`.
    pub fn stream(&self, which: Substream) -> StreamRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(which.id());
        StreamRng { inner }
    }
}

/// One substream; a thin wrapper so callers never touch the generator type.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    /// `count` draws from the half-open interval `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
        let dist = uniform(lo, hi)?;
        Ok((0..count).map(|_| dist.sample(&mut self.inner)).collect())
    }

    /// A single draw from `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// `k` distinct indices from `0..n` (all of them if `k >= n`), in draw order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.inner, n, k.min(n)).into_vec()
    }
}

/// Convenience wrapper over one substream of `rng`.
pub fn rng_uniform(rng: &SeededRng, which: Substream, lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    rng.stream(which).uniform(lo, hi, count)
}

fn uniform(lo: f64, hi: f64) -> Result<Uniform<f64>> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    Uniform::new(lo, hi).map_err(|_| Error::InvalidRange { lo, hi })
}
