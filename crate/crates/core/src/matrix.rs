//! Bit-packed symmetric ±1 matrices.
//!
//! Only the upper triangle (diagonal included) is stored. Entry `(i, j)` with
//! `i ≤ j` lives at triangle index
//!
//! ```text
//! idx(i, j) = i(2n - i + 1)/2 + (j - i)
//! ```
//!
//! and `(j, i)` reads the same bit, so symmetry holds by construction. A clear
//! bit is the entry `+1`, a set bit is `-1`.
//!
//! The canonical integer of a matrix puts triangle index 0 in the most
//! significant position: `P = Σ_k b_k · 2^(T-1-k)` with `T = n(n+1)/2`.
//! Enumeration walks `P = 0, 1, …, 2^T - 1` and the hex form of `P` is the
//! serialization used in reports.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 64;
const WORDS: usize = (MAX_DIM * (MAX_DIM + 1) / 2).div_ceil(64);

/// Number of free bits `n(n+1)/2` of an `n × n` symmetric matrix.
#[inline]
pub const fn triangle_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of entry `(i, j)` in the packed triangle, for either index order.
#[inline]
pub fn triangle_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * n - i + 1) / 2 + (j - i)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignMatrix {
    n: usize,
    bits: [u64; WORDS],
}

impl SignMatrix {
    fn check_dim(n: usize) -> Result<()> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::DimensionOutOfRange { n, max: MAX_DIM });
        }
        Ok(())
    }

    /// The matrix with every entry `+1`.
    pub fn all_plus(n: usize) -> Result<Self> {
        Self::check_dim(n)?;
        Ok(SignMatrix { n, bits: [0; WORDS] })
    }

    /// Builds a matrix from its triangle bits, `bit(k)` giving triangle index `k`.
    pub fn from_triangle_bits(n: usize, mut bit: impl FnMut(usize) -> bool) -> Result<Self> {
        let mut m = Self::all_plus(n)?;
        for k in 0..triangle_len(n) {
            if bit(k) {
                m.bits[k / 64] |= 1 << (k % 64);
            }
        }
        Ok(m)
    }

    /// Builds the matrix whose canonical integer is `packed`.
    /// Requires `n(n+1)/2 ≤ 64`.
    pub fn from_packed(n: usize, packed: u64) -> Result<Self> {
        let t = triangle_len(n);
        if t > 64 {
            return Err(Error::EnumerationTooLarge {
                n,
                bits: t,
                max_bits: 64,
            });
        }
        if t < 64 && packed >> t != 0 {
            return Err(Error::InvalidParameter(format!(
                "packed value {packed:#x} has more than {t} bits"
            )));
        }
        Self::from_triangle_bits(n, |k| (packed >> (t - 1 - k)) & 1 == 1)
    }

    /// Builds a matrix from explicit rows of `±1`. The rows must describe a
    /// symmetric matrix.
    pub fn from_rows<R: AsRef<[i8]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        Self::check_dim(n)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            for (j, &e) in row.iter().enumerate() {
                if e != 1 && e != -1 {
                    return Err(Error::InvalidParameter(format!("entry ({i},{j}) = {e} is not ±1")));
                }
                if e != rows[j].as_ref()[i] {
                    return Err(Error::InvalidParameter(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        let mut m = Self::all_plus(n)?;
        for (i, row) in rows.iter().enumerate() {
            for j in i..n {
                if row.as_ref()[j] == -1 {
                    m.set_bit(triangle_index(n, i, j));
                }
            }
        }
        Ok(m)
    }

    /// Parses the canonical hex serialization.
    pub fn from_hex(n: usize, hex: &str) -> Result<Self> {
        Self::check_dim(n)?;
        let t = triangle_len(n);
        let digits = hex.trim_start_matches("0x");
        if digits.len() != t.div_ceil(4) {
            return Err(Error::InvalidParameter(format!(
                "expected {} hex digits for n = {n}, got {}",
                t.div_ceil(4),
                digits.len()
            )));
        }
        let mut m = Self::all_plus(n)?;
        // digit d counted from the right covers integer bits 4d..4d+3
        for (d, ch) in digits.chars().rev().enumerate() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| Error::InvalidParameter(format!("bad hex digit {ch:?}")))?;
            for b in 0..4 {
                if (v >> b) & 1 == 1 {
                    let pos = 4 * d + b as usize;
                    if pos >= t {
                        return Err(Error::InvalidParameter("hex value out of range".into()));
                    }
                    m.set_bit(t - 1 - pos);
                }
            }
        }
        Ok(m)
    }

    #[inline]
    fn set_bit(&mut self, k: usize) {
        self.bits[k / 64] |= 1 << (k % 64);
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Triangle bit `k`; `true` means the entry is `-1`.
    #[inline]
    pub fn bit(&self, k: usize) -> bool {
        (self.bits[k / 64] >> (k % 64)) & 1 == 1
    }

    #[inline]
    pub fn is_negative(&self, i: usize, j: usize) -> bool {
        self.bit(triangle_index(self.n, i, j))
    }

    /// Entry `(i, j)` as `±1`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> i8 {
        if self.is_negative(i, j) {
            -1
        } else {
            1
        }
    }

    /// Bitmask of the `-1` entries in row `i`.
    pub fn row_negatives(&self, i: usize) -> u64 {
        (0..self.n).fold(0u64, |acc, j| acc | (u64::from(self.is_negative(i, j)) << j))
    }

    pub fn rows(&self) -> Vec<Vec<i8>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// Canonical integer, when it fits in 64 bits.
    pub fn packed(&self) -> Option<u64> {
        let t = triangle_len(self.n);
        (t <= 64).then(|| (0..t).fold(0u64, |acc, k| (acc << 1) | u64::from(self.bit(k))))
    }

    /// Canonical hex serialization, zero-padded to `⌈T/4⌉` digits.
    pub fn to_hex(&self) -> String {
        let t = triangle_len(self.n);
        let ndig = t.div_ceil(4);
        let mut out = String::with_capacity(ndig);
        for d in (0..ndig).rev() {
            let mut v = 0u32;
            for b in 0..4 {
                let pos = 4 * d + b;
                if pos < t && self.bit(t - 1 - pos) {
                    v |= 1 << b;
                }
            }
            out.push(char::from_digit(v, 16).unwrap());
        }
        out
    }
}

impl fmt::Debug for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignMatrix(n={}, 0x{})", self.n, self.to_hex())
    }
}

impl fmt::Display for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            for j in 0..self.n {
                let s = if self.is_negative(i, j) { " -" } else { " +" };
                f.write_str(s)?;
            }
            if i + 1 < self.n {
                f.write_str("\n")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn index_formula_is_row_major_over_upper_triangle() {
        for n in 1..=9 {
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    assert_eq!(triangle_index(n, i, j), k);
                    assert_eq!(triangle_index(n, j, i), k);
                    k += 1;
                }
            }
            assert_eq!(k, triangle_len(n));
        }
    }

    #[test]
    fn packed_msb_is_top_left_entry() {
        // n = 2: T = 3, bits (0,0), (0,1), (1,1)
        let m = SignMatrix::from_packed(2, 0b100).unwrap();
        assert_eq!(m.rows(), vec![vec![-1, 1], vec![1, 1]]);
        let m = SignMatrix::from_packed(2, 0b010).unwrap();
        assert_eq!(m.rows(), vec![vec![1, -1], vec![-1, 1]]);
        assert_eq!(m.to_hex(), "2");
        assert!(SignMatrix::from_packed(2, 0b1000).is_err());
    }

    #[test]
    fn from_rows_validates() {
        assert!(SignMatrix::from_rows(&[[1i8, -1], [1, 1]]).is_err());
        assert!(SignMatrix::from_rows(&[[1i8, 0], [0, 1]]).is_err());
        assert!(SignMatrix::from_rows::<[i8; 0]>(&[]).is_err());
        let m = SignMatrix::from_rows(&[[1i8, -1], [-1, -1]]).unwrap();
        assert_eq!(m.row_negatives(1), 0b11);
        assert_eq!(m.row_negatives(0), 0b10);
        assert_eq!(format!("{m}"), " + -\n - -");
    }

    #[test]
    fn large_dimension_hex() {
        let m = SignMatrix::from_triangle_bits(64, |k| k % 3 == 0).unwrap();
        let hex = m.to_hex();
        assert_eq!(hex.len(), triangle_len(64).div_ceil(4));
        assert_eq!(SignMatrix::from_hex(64, &hex).unwrap(), m);
        assert!(m.packed().is_none());
        assert!(SignMatrix::all_plus(65).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_hex_round_trip(n in 1usize..=12, seed in any::<u64>()) {
            let m = SignMatrix::from_triangle_bits(n, |k| (seed.rotate_left(k as u32 % 64) ^ k as u64) & 1 == 1).unwrap();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(m.entry(i, j), m.entry(j, i));
                }
            }
            prop_assert_eq!(SignMatrix::from_hex(n, &m.to_hex()).unwrap(), m);
            if let Some(p) = m.packed() {
                prop_assert_eq!(SignMatrix::from_packed(n, p).unwrap(), m);
                prop_assert_eq!(u64::from_str_radix(&m.to_hex(), 16).unwrap(), p);
            }
        }
    }
}
