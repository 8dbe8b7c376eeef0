use std::ops::Index;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modulus::Modulus;

/// A vector in `ℤ_q^n` with every entry reduced into `[0, q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ResidueVector {
    q: Modulus,
    entries: Vec<u64>,
}

impl ResidueVector {
    pub fn new(q: Modulus, entries: Vec<u64>) -> Result<Self> {
        if let Some(&value) = entries.iter().find(|&&e| e >= q.get()) {
            return Err(Error::UnreducedEntry { value, q: q.get() });
        }
        Ok(ResidueVector { q, entries })
    }

    /// Reduces arbitrary signed integers mod `q`.
    pub fn from_signed(q: Modulus, entries: &[i64]) -> Self {
        ResidueVector {
            q,
            entries: entries.iter().map(|&e| q.reduce_signed(e)).collect(),
        }
    }

    pub fn zero(q: Modulus, n: usize) -> Self {
        ResidueVector { q, entries: vec![0; n] }
    }

    /// Uniform vector in `ℤ_q^n`.
    pub fn random<R: Rng + ?Sized>(q: Modulus, n: usize, rng: &mut R) -> Self {
        ResidueVector {
            q,
            entries: (0..n).map(|_| rng.random_range(0..q.get())).collect(),
        }
    }

    /// Vector with entries uniform in `[1, q)`.
    pub fn random_nonzero<R: Rng + ?Sized>(q: Modulus, n: usize, rng: &mut R) -> Self {
        ResidueVector {
            q,
            entries: (0..n).map(|_| rng.random_range(1..q.get())).collect(),
        }
    }

    /// The vector whose base-`q` digits (least significant first) are `code`.
    pub fn from_index(q: Modulus, n: usize, mut code: u64) -> Self {
        let entries = (0..n)
            .map(|_| {
                let d = code % q.get();
                code /= q.get();
                d
            })
            .collect();
        ResidueVector { q, entries }
    }

    /// Every vector of `ℤ_q^n`, in base-`q` counting order (first coordinate fastest).
    pub fn all(q: Modulus, n: usize) -> impl Iterator<Item = ResidueVector> {
        let total = (q.get() as u128).pow(n as u32);
        (0..total).map(move |code| ResidueVector::from_index(q, n, code as u64))
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.q
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// Number of nonzero coordinates.
    pub fn support_size(&self) -> usize {
        self.entries.iter().filter(|&&e| e != 0).count()
    }

    pub fn add(&self, other: &ResidueVector) -> Result<ResidueVector> {
        self.check_compatible(other)?;
        let q = self.q;
        Ok(ResidueVector {
            q,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&x, &y)| q.add(x, y))
                .collect(),
        })
    }

    pub(crate) fn check_compatible(&self, other: &ResidueVector) -> Result<()> {
        if self.q != other.q {
            return Err(Error::ModulusMismatch(self.q.get(), other.q.get()));
        }
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for ResidueVector {
    type Output = u64;

    fn index(&self, i: usize) -> &u64 {
        &self.entries[i]
    }
}
