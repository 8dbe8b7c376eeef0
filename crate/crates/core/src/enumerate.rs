//! Exhaustive enumeration of symmetric sign matrices in canonical order.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{triangle_len, SignMatrix};

/// At most `2^30` matrices are ever enumerated.
pub const MAX_ENUMERATION_BITS: usize = 30;

fn check_guard(n: usize) -> Result<usize> {
    let bits = triangle_len(n);
    if n == 0 {
        return Err(Error::DimensionOutOfRange {
            n,
            max: crate::matrix::MAX_DIM,
        });
    }
    if bits > MAX_ENUMERATION_BITS {
        return Err(Error::EnumerationTooLarge {
            n,
            bits,
            max_bits: MAX_ENUMERATION_BITS,
        });
    }
    Ok(bits)
}

/// Number of `n × n` symmetric sign matrices, `2^(n(n+1)/2)`, within the guard.
pub fn enumeration_count(n: usize) -> Result<u64> {
    Ok(1u64 << check_guard(n)?)
}

/// Iterator over a contiguous range of canonical integers.
#[derive(Clone, Debug)]
pub struct SymmetricEnumerator {
    n: usize,
    range: Range<u64>,
}

impl Iterator for SymmetricEnumerator {
    type Item = SignMatrix;

    fn next(&mut self) -> Option<SignMatrix> {
        let p = self.range.next()?;
        Some(SignMatrix::from_packed(self.n, p).expect("range is within the guard"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.range.size_hint()
    }
}

impl ExactSizeIterator for SymmetricEnumerator {}

/// All `2^(n(n+1)/2)` matrices in increasing canonical order.
pub fn enumerate_symmetric(n: usize) -> Result<SymmetricEnumerator> {
    let count = enumeration_count(n)?;
    Ok(SymmetricEnumerator { n, range: 0..count })
}

/// The matrices whose canonical integer lies in `range`.
pub fn enumerate_range(n: usize, range: Range<u64>) -> Result<SymmetricEnumerator> {
    let count = enumeration_count(n)?;
    if range.end > count {
        return Err(Error::InvalidParameter(format!(
            "range end {} exceeds {count}",
            range.end
        )));
    }
    Ok(SymmetricEnumerator { n, range })
}

/// Splits the canonical order into blocks sharing a fixed high-bit prefix of
/// `prefix_bits` bits (fewer if the triangle is shorter).
pub fn prefix_partitions(n: usize, prefix_bits: usize) -> Result<Vec<Range<u64>>> {
    let bits = check_guard(n)?;
    let prefix = prefix_bits.min(bits);
    let block = 1u64 << (bits - prefix);
    Ok((0..1u64 << prefix).map(|p| p * block..(p + 1) * block).collect())
}

/// Folds every matrix of size `n` in parallel. Blocks are reduced with
/// `combine`, which must be associative and commutative for the result to be
/// independent of scheduling.
pub fn par_fold_matrices<T, F, C>(n: usize, identity: T, fold: F, combine: C) -> Result<T>
where
    T: Clone + Send + Sync,
    F: Fn(T, &SignMatrix) -> T + Send + Sync,
    C: Fn(T, T) -> T + Send + Sync,
{
    let parts = prefix_partitions(n, 8)?;
    let partials: Vec<T> = parts
        .into_par_iter()
        .map(|r| {
            enumerate_range(n, r)
                .expect("partition is within the guard")
                .fold(identity.clone(), |acc, m| fold(acc, &m))
        })
        .collect();
    Ok(partials.into_iter().fold(identity, combine))
}
