//! Seeded random streams.
//!
//! A stream is ChaCha12 keyed by a 64-bit seed. Per-round substreams keep the
//! master seed as key and use the round number as the ChaCha stream id, so
//! rounds can run in any order (or in parallel) and still draw the same bits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bell::PauliCode;

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    inner: ChaCha12Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            inner: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Independent substream `stream_id` of the master `seed`.
    pub fn substream(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RandomStream { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// `true` with probability `p`; exact for `p = 0` and `p = 1`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn code(&mut self) -> PauliCode {
        PauliCode::from_index(self.inner.random_range(0..4))
    }

    /// Draws an index with probability proportional to `weights`.
    ///
    /// Zero-weight entries are never returned.
    pub fn sample_index(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let u = self.unit() * total;
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
        last
    }
}
