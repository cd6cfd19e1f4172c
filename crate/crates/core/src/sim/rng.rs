//! Reproducible random streams addressed by (seed, replication, stream).

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::distfn::normal_quantile;

/// Independent streams used within one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Design = 0,
    Noise = 1,
    Coefficients = 2,
    Response = 3,
}

/// ChaCha8 keyed by the seed, with the stream id selecting one of 16 streams
/// per replication. Gaussians come from the inverse normal distribution
/// function so that draws are reproducible across platforms.
pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64, replication: u64, stream: Stream) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(replication.wrapping_mul(16).wrapping_add(stream as u64));
        Self { inner }
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn gaussian(&mut self) -> f64 {
        normal_quantile(self.uniform()).expect("uniform draw lies strictly inside (0, 1)")
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}
