//! Character-sum evaluation of `Pr[M·a = v]` over `ℤ_q`.
//!
//! With `e_q(x) = exp(2πix/q)` and `m_ij = m_ji` uniform in `{±1}`,
//!
//! ```text
//! Pr[M·a = v] = q^-n Σ_ℓ e_q(-ℓᵀv) Π_{i<j} cos(2π(ℓ_i a_j + ℓ_j a_i)/q) Π_i cos(2π ℓ_i a_i/q)
//! ```
//!
//! The sum runs over all `q^n` frequencies. It is split into fixed-size blocks
//! of consecutive frequency codes; blocks are summed in parallel and then
//! combined in block order, so the result does not depend on the thread pool.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modulus::{is_prime, Modulus};
use crate::vector::ResidueVector;

/// Largest number of frequencies a character sum may visit.
pub const MAX_TERMS: u64 = 10_000_000;
const BLOCK: u64 = 1 << 12;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn term_count(q: Modulus, n: usize) -> Result<u64> {
    let limit = Error::TooManyTerms {
        q: q.get(),
        n,
        limit: MAX_TERMS,
    };
    let count = q.get().checked_pow(n as u32).ok_or(limit.clone())?;
    if count > MAX_TERMS {
        return Err(limit);
    }
    Ok(count)
}

/// Cosine table `cos(2πk/q)` for `k ∈ [0, q)`.
fn cos_table(q: Modulus) -> Vec<f64> {
    let qf = q.get() as f64;
    (0..q.get()).map(|k| (2.0 * PI * k as f64 / qf).cos()).collect()
}

/// Runs `visit` on every frequency code in `[start, end)` with its digit vector,
/// advancing the digits incrementally.
fn for_each_frequency(q: u64, n: usize, start: u64, end: u64, mut visit: impl FnMut(&[u64])) {
    let mut digits = vec![0u64; n];
    let mut c = start;
    for d in digits.iter_mut() {
        *d = c % q;
        c /= q;
    }
    for _ in start..end {
        visit(&digits);
        for d in digits.iter_mut() {
            *d += 1;
            if *d < q {
                break;
            }
            *d = 0;
        }
    }
}

fn blocks(total: u64) -> Vec<(u64, u64)> {
    (0..total.div_ceil(BLOCK))
        .map(|b| (b * BLOCK, ((b + 1) * BLOCK).min(total)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CharacterSumResult {
    pub probability: f64,
    /// Magnitude of the imaginary part discarded at the end.
    pub imaginary_residual: f64,
    pub term_count: u64,
}

/// `Pr[M·a = v]` by Fourier inversion over `ℤ_q^n`.
pub fn prob_fourier(a: &ResidueVector, v: &ResidueVector) -> Result<CharacterSumResult> {
    a.check_compatible(v)?;
    let q = a.modulus();
    let n = a.len();
    let total = term_count(q, n)?;
    let cos = cos_table(q);
    let sin: Vec<f64> = {
        let qf = q.get() as f64;
        (0..q.get()).map(|k| (2.0 * PI * k as f64 / qf).sin()).collect()
    };
    let (ae, ve) = (a.entries(), v.entries());

    let partials: Vec<(CompensatedSum, CompensatedSum)> = blocks(total)
        .into_par_iter()
        .map(|(start, end)| {
            let mut re = CompensatedSum::default();
            let mut im = CompensatedSum::default();
            for_each_frequency(q.get(), n, start, end, |l| {
                let mut prod = 1.0;
                for i in 0..n {
                    prod *= cos[q.mul(l[i], ae[i]) as usize];
                    for j in i + 1..n {
                        prod *= cos[q.add(q.mul(l[i], ae[j]), q.mul(l[j], ae[i])) as usize];
                    }
                }
                let dot = l.iter().zip(ve).fold(0, |acc, (&x, &y)| q.add(acc, q.mul(x, y)));
                let phase = q.neg(dot) as usize;
                re.add(prod * cos[phase]);
                im.add(prod * sin[phase]);
            });
            (re, im)
        })
        .collect();

    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    for (r, i) in partials {
        re.merge(r);
        im.merge(i);
    }
    let scale = total as f64;
    Ok(CharacterSumResult {
        probability: re.value() / scale,
        imaginary_residual: (im.value() / scale).abs(),
        term_count: total,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorTermResult {
    /// `Σ_{ℓ≠0} Π_{i<j} |cos(2π(ℓ_i a_j + ℓ_j a_i)/q)|`.
    pub value: f64,
    /// `Σ_{ℓ≠0} exp(-2N(ℓ,a)/q²)` with `N` counting unordered pairs.
    pub exp_bound: f64,
    /// Every summand of `value` is at most the matching summand of `exp_bound`.
    pub termwise_dominated: bool,
    pub term_count: u64,
}

/// The nonzero-frequency mass of the character sum, without diagonal factors.
pub fn error_term(a: &ResidueVector) -> Result<ErrorTermResult> {
    let q = a.modulus();
    let n = a.len();
    let total = term_count(q, n)?;
    let abs_cos: Vec<f64> = cos_table(q).into_iter().map(f64::abs).collect();
    let qf = q.get() as f64;
    let decay = (-2.0 / (qf * qf)).exp();
    let ae = a.entries();

    let partials: Vec<(CompensatedSum, CompensatedSum, bool)> = blocks(total)
        .into_par_iter()
        .map(|(start, end)| {
            let mut value = CompensatedSum::default();
            let mut bound = CompensatedSum::default();
            let mut dominated = true;
            for_each_frequency(q.get(), n, start, end, |l| {
                if l.iter().all(|&x| x == 0) {
                    return;
                }
                let mut prod = 1.0;
                let mut nonzero_pairs = 0i32;
                for i in 0..n {
                    for j in i + 1..n {
                        let k = q.add(q.mul(l[i], ae[j]), q.mul(l[j], ae[i]));
                        prod *= abs_cos[k as usize];
                        nonzero_pairs += i32::from(k != 0);
                    }
                }
                let b = decay.powi(nonzero_pairs);
                dominated &= prod <= b * (1.0 + 1e-12);
                value.add(prod);
                bound.add(b);
            });
            (value, bound, dominated)
        })
        .collect();

    let (mut value, mut bound, mut dominated) = (CompensatedSum::default(), CompensatedSum::default(), true);
    for (v, b, d) in partials {
        value.merge(v);
        bound.merge(b);
        dominated &= d;
    }
    Ok(ErrorTermResult {
        value: value.value(),
        exp_bound: bound.value(),
        termwise_dominated: dominated,
        term_count: total,
    })
}

/// Whether `|cos(πm/q)| ≤ exp(-2/q²)` for every `m ∈ [1, q-1]`.
pub fn cos_decay_check(q: Modulus) -> bool {
    let qf = q.get() as f64;
    let bound = (-2.0 / (qf * qf)).exp();
    (1..q.get()).all(|m| (PI * m as f64 / qf).cos().abs() <= bound)
}

/// Runs [`cos_decay_check`] for every odd prime `q ≤ limit`, returning the
/// moduli where it fails.
pub fn cos_decay_sweep(limit: u64) -> Vec<u64> {
    (3..=limit)
        .step_by(2)
        .filter(|&q| is_prime(q))
        .filter(|&q| !cos_decay_check(Modulus::new(q).expect("odd prime")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::exact_event_probability;
    use rand::SeedableRng;

    fn q(x: u64) -> Modulus {
        Modulus::new(x).unwrap()
    }

    fn v(m: u64, e: &[u64]) -> ResidueVector {
        ResidueVector::new(q(m), e.to_vec()).unwrap()
    }

    #[test]
    fn one_dimensional_examples() {
        let r = prob_fourier(&v(3, &[1]), &v(3, &[0])).unwrap();
        assert!(r.probability.abs() < 1e-12, "{}", r.probability);
        assert_eq!(r.term_count, 3);
        let r = prob_fourier(&v(3, &[0]), &v(3, &[0])).unwrap();
        assert!((r.probability - 1.0).abs() < 1e-12);
        let r = prob_fourier(&v(3, &[1]), &v(3, &[1])).unwrap();
        assert!((r.probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_matches_enumeration() {
        let a = v(3, &[1, 2]);
        let z = v(3, &[0, 0]);
        let f = prob_fourier(&a, &z).unwrap();
        let e = exact_event_probability(&a, &z).unwrap();
        assert!((f.probability - e.value).abs() <= 1e-9);
        assert!(f.imaginary_residual <= 1e-9);
    }

    #[test]
    fn inversion_exact_for_small_spaces() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for (m, n) in [
            (3u64, 1usize),
            (3, 2),
            (3, 3),
            (3, 4),
            (5, 2),
            (5, 3),
            (7, 2),
            (11, 2),
            (13, 2),
        ] {
            for _ in 0..6 {
                let a = ResidueVector::random(q(m), n, &mut rng);
                let t = ResidueVector::random(q(m), n, &mut rng);
                let f = prob_fourier(&a, &t).unwrap();
                let e = exact_event_probability(&a, &t).unwrap();
                assert!((f.probability - e.value).abs() <= 1e-9, "{a:?} {t:?}");
                assert!(f.imaginary_residual <= 1e-9);
            }
        }
    }

    #[test]
    fn term_guard() {
        let a = ResidueVector::zero(q(3), 15);
        assert!(matches!(prob_fourier(&a, &a), Err(Error::TooManyTerms { .. })));
        assert!(matches!(
            error_term(&ResidueVector::zero(q(101), 40)),
            Err(Error::TooManyTerms { .. })
        ));
    }

    #[test]
    fn error_term_examples() {
        for a in 0..3 {
            let r = error_term(&v(3, &[a])).unwrap();
            assert_eq!(r.value, 2.0);
            assert_eq!(r.exp_bound, 2.0);
        }
        // a = (1,1): the pair term is ℓ₁ + ℓ₂; |cos(2πk/3)| is 1 for k = 0 and
        // 1/2 otherwise. Among the 8 nonzero ℓ, (1,2) and (2,1) give k = 0.
        let r = error_term(&v(3, &[1, 1])).unwrap();
        let direct: f64 = (1..9u64)
            .map(|c| ((2.0 * PI * ((c % 3 + c / 3) % 3) as f64 / 3.0).cos()).abs())
            .sum();
        assert!((r.value - direct).abs() < 1e-12);
        assert!((r.value - 5.0).abs() < 1e-12);
        assert!(r.value <= r.exp_bound);
    }

    #[test]
    fn error_term_dominated_by_exponential_series() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for (m, n) in [(3u64, 5usize), (5, 4), (7, 3), (11, 3)] {
            for _ in 0..5 {
                let a = ResidueVector::random(q(m), n, &mut rng);
                let r = error_term(&a).unwrap();
                assert!(r.termwise_dominated);
                assert!(r.value <= r.exp_bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn deviation_bounded_by_error_term() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for (m, n) in [(3u64, 3usize), (5, 2), (3, 4)] {
            for _ in 0..8 {
                let a = ResidueVector::random(q(m), n, &mut rng);
                let t = ResidueVector::random(q(m), n, &mut rng);
                let p = exact_event_probability(&a, &t).unwrap().value;
                let base = (m as f64).powi(-(n as i32));
                let err = error_term(&a).unwrap().value;
                assert!((p - base).abs() <= base * err + 1e-12);
            }
        }
    }

    #[test]
    fn cosine_decay() {
        assert!(cos_decay_check(q(3)));
        assert!(cos_decay_check(q(101)));
        assert!(cos_decay_sweep(101).is_empty());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn block_partition_covers_range() {
        let b = blocks(10_000);
        assert_eq!(b.first().unwrap().0, 0);
        assert_eq!(b.last().unwrap().1, 10_000);
        assert!(b.windows(2).all(|w| w[0].1 == w[1].0));
        let mut seen = 0u64;
        for_each_frequency(3, 4, 5, 81, |l| {
            let code = l.iter().rev().fold(0, |acc, &d| acc * 3 + d);
            assert_eq!(code, 5 + seen);
            seen += 1;
        });
        assert_eq!(seen, 76);
    }
}
