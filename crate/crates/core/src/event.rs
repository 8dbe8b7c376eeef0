//! The matrix-vector product over `ℤ_q` and exact event probabilities.

use serde::Serialize;

use crate::enumerate::{enumeration_count, par_fold_matrices};
use crate::error::{Error, Result};
use crate::matrix::triangle_len;
use crate::matrix::SignMatrix;
use crate::vector::ResidueVector;

/// A nonnegative fraction kept as the unreduced pair it was counted as.
/// Serializes as `{numerator, denominator, decimal}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactFraction {
    pub numerator: u64,
    pub denominator: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl ExactFraction {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        assert!(denominator > 0, "zero denominator");
        ExactFraction { numerator, denominator }
    }

    pub fn reduced(self) -> Self {
        let g = gcd(self.numerator, self.denominator).max(1);
        ExactFraction {
            numerator: self.numerator / g,
            denominator: self.denominator / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Value equality, ignoring representation.
    pub fn same_value(self, other: ExactFraction) -> bool {
        self.numerator as u128 * other.denominator as u128 == other.numerator as u128 * self.denominator as u128
    }
}

impl Serialize for ExactFraction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("ExactFraction", 3)?;
        st.serialize_field("numerator", &self.numerator)?;
        st.serialize_field("denominator", &self.denominator)?;
        st.serialize_field("decimal", &self.to_f64())?;
        st.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Enumeration,
    Fourier,
    MonteCarlo,
}

/// A probability together with how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbabilityEstimate {
    pub value: f64,
    pub method: Method,
    /// Matrices enumerated or sampled.
    pub samples: u64,
    /// Zero for exact methods.
    pub stderr: f64,
    pub exact: Option<ExactFraction>,
}

impl ProbabilityEstimate {
    pub fn exact(fraction: ExactFraction) -> Self {
        ProbabilityEstimate {
            value: fraction.to_f64(),
            method: Method::Enumeration,
            samples: fraction.denominator,
            stderr: 0.0,
            exact: Some(fraction),
        }
    }

    /// Plug-in binomial estimate from `hits` successes out of `samples`.
    pub fn monte_carlo(hits: u64, samples: u64) -> Self {
        let p = hits as f64 / samples as f64;
        ProbabilityEstimate {
            value: p,
            method: Method::MonteCarlo,
            samples,
            stderr: (p * (1.0 - p) / samples as f64).sqrt(),
            exact: None,
        }
    }
}

/// `M·a mod q`, with `-1` acting as `q - 1`.
pub fn mat_vec_mod_q(m: &SignMatrix, a: &ResidueVector) -> Result<ResidueVector> {
    if m.n() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            actual: a.len(),
        });
    }
    let q = a.modulus();
    let entries = (0..m.n())
        .map(|i| {
            (0..m.n()).fold(0u64, |acc, j| {
                let x = a[j];
                if m.is_negative(i, j) {
                    q.sub(acc, x)
                } else {
                    q.add(acc, x)
                }
            })
        })
        .collect();
    ResidueVector::new(q, entries)
}

/// Whether `M·a ≡ v (mod q)`, without allocating.
pub fn maps_to(m: &SignMatrix, a: &ResidueVector, v: &ResidueVector) -> bool {
    let q = a.modulus();
    let n = m.n();
    (0..n).all(|i| {
        let row = (0..n).fold(0u64, |acc, j| {
            if m.is_negative(i, j) {
                q.sub(acc, a[j])
            } else {
                q.add(acc, a[j])
            }
        });
        row == v[i]
    })
}

/// Number of matrices with `M·a ≡ v`, by exhaustive enumeration.
pub fn count_event(a: &ResidueVector, v: &ResidueVector) -> Result<u64> {
    a.check_compatible(v)?;
    let n = a.len();
    par_fold_matrices(n, 0u64, |acc, m| acc + u64::from(maps_to(m, a, v)), |x, y| x + y)
}

/// `Pr[M·a = v]` over a uniform symmetric sign matrix, by enumeration.
pub fn exact_event_probability(a: &ResidueVector, v: &ResidueVector) -> Result<ProbabilityEstimate> {
    let n = a.len();
    let total = enumeration_count(n)?;
    debug_assert_eq!(total, 1u64 << triangle_len(n));
    let hits = count_event(a, v)?;
    Ok(ProbabilityEstimate::exact(ExactFraction::new(hits, total)))
}
