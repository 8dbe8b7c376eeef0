//! Prime moduli and arithmetic in the field of residues mod q.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest modulus accepted. Keeps every product of two residues inside `u64`.
pub const MAX_MODULUS: u64 = u32::MAX as u64;

/// An odd prime modulus `q ≥ 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Modulus(u64);

/// Trial-division primality test.
pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    if x < 4 {
        return true;
    }
    if x.is_multiple_of(2) || x.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= x {
        if x.is_multiple_of(d) || x.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if !(3..=MAX_MODULUS).contains(&q) || !is_prime(q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Modulus(q))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn reduce(self, x: u64) -> u64 {
        x % self.0
    }

    /// Reduces a signed integer into `[0, q)`.
    #[inline]
    pub fn reduce_signed(self, x: i64) -> u64 {
        x.rem_euclid(self.0 as i64) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        (a * b) % self.0
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.0;
        base %= self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    /// Returns `None` for zero.
    pub fn inv(self, a: u64) -> Option<u64> {
        let a = a % self.0;
        if a == 0 {
            return None;
        }
        let (mut old_r, mut r) = (a as i64, self.0 as i64);
        let (mut old_s, mut s) = (1i64, 0i64);
        while r != 0 {
            let quot = old_r / r;
            (old_r, r) = (r, old_r - quot * r);
            (old_s, s) = (s, old_s - quot * s);
        }
        debug_assert_eq!(old_r, 1);
        Some(self.reduce_signed(old_s))
    }

    /// Residue of a sign: `+1 ↦ 1`, `-1 ↦ q - 1`.
    #[inline]
    pub fn sign(self, negative: bool) -> u64 {
        if negative {
            self.0 - 1
        } else {
            1
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<u64> for Modulus {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        Modulus::new(q)
    }
}

/// Natural or binary logarithm, used wherever a threshold involves `log n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

/// Smallest odd prime `≥ max(3, round(√n / logᶜ n))`, using the natural log.
///
/// When `log n` vanishes (`n = 1`) the target is clamped to the floor.
pub fn next_valid_modulus(n: u64, c: f64) -> Modulus {
    next_valid_modulus_with(n, c, LogBase::Natural)
}

pub fn next_valid_modulus_with(n: u64, c: f64, base: LogBase) -> Modulus {
    assert!(n >= 1, "dimension must be positive");
    assert!(c >= 0.0 && c.is_finite(), "exponent must be a finite nonnegative real");
    let nf = n as f64;
    let denom = if c == 0.0 { 1.0 } else { base.log(nf).powf(c) };
    let target = if denom > 0.0 { (nf.sqrt() / denom).round() } else { 3.0 };
    let mut candidate = if target.is_finite() && target > 3.0 {
        target.min(MAX_MODULUS as f64) as u64
    } else {
        3
    };
    if candidate % 2 == 0 {
        candidate += 1;
    }
    while !is_prime(candidate) {
        candidate += 2;
    }
    Modulus(candidate)
}
