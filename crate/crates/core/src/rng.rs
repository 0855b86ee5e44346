//! Seeded, splittable uniform streams.
//!
//! Every replication draws from its own ChaCha8 stream selected by
//! `(master seed, replication index)`. ChaCha is counter based, so a stream
//! is fully determined by that pair and results do not depend on which
//! worker thread runs which replication.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform stream for one replication.
#[derive(Clone, Debug)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(index);
        Stream { inner }
    }

    /// Uniform on the open interval (0, 1), 53 bits of resolution.
    #[inline]
    pub fn open01(&mut self) -> f64 {
        let bits = self.inner.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}
