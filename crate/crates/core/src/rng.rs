//! Counter-based random streams.
//!
//! Every draw is addressed by a `(seed, index)` pair: the seed keys a ChaCha8
//! generator and the index selects one of its 2^64 independent streams. A
//! sample is therefore a pure function of the pair, so a Monte-Carlo run can be
//! split across any number of workers and still reproduce bit for bit.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::matrix::{triangle_len, SignMatrix};

/// Seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 0xFE12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        RngStream { seed, index }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}

/// Draws a uniform symmetric sign matrix: each of the `n(n+1)/2` triangle bits
/// is an independent fair coin taken from the stream.
pub fn sample_symmetric(n: usize, stream: RngStream) -> Result<SignMatrix> {
    let mut rng = stream.rng();
    let words: Vec<u64> = (0..triangle_len(n).div_ceil(64)).map(|_| rng.next_u64()).collect();
    SignMatrix::from_triangle_bits(n, |k| (words[k / 64] >> (k % 64)) & 1 == 1)
}
