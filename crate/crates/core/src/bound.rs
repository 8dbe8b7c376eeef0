//! Log-space evaluation of the double-sum bound on the error term:
//!
//! ```text
//! S1 = Σ_{s=1}^{n}   C(n,s) q^s     exp(-s·τ/q²)
//! S2 = Σ_{s=⌈τ⌉}^{n} C(n,s) (q-1)^s exp(-s²/(20q²))
//! ```
//!
//! where `τ = n / log² n` unless overridden. Both summands are log-concave in
//! `s`, which lets long sums start at their peak and stop once a geometric tail
//! bound falls below `e^-60` of the peak term.

use serde::Serialize;

use crate::fourier::CompensatedSum;
use crate::modulus::Modulus;

/// Sums with at most this many terms are evaluated in full.
const FULL_SUM_LIMIT: u64 = 1_000_000;
/// Truncation point, relative to the peak term, in log units.
const TAIL_CUTOFF: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticBoundResult {
    pub log_s1: f64,
    /// `-∞` when the second sum is empty.
    pub log_s2: f64,
    pub log_total: f64,
}

/// `log C(n, s)` via log-gamma.
pub fn ln_binomial(n: u64, s: u64) -> f64 {
    debug_assert!(s <= n);
    let (n, s) = (n as f64, s as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(s + 1.0) - libm::lgamma(n - s + 1.0)
}

/// `log(e^x + e^y)`.
pub fn log_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log Σ_{s=lo}^{hi} exp(term(s))` for a concave `term`.
fn log_sum_concave(lo: u64, hi: u64, term: impl Fn(u64) -> f64, full_limit: u64) -> f64 {
    if lo > hi {
        return f64::NEG_INFINITY;
    }
    if hi - lo < full_limit {
        let peak = (lo..=hi).map(&term).fold(f64::NEG_INFINITY, f64::max);
        let mut acc = CompensatedSum::default();
        for s in lo..=hi {
            acc.add((term(s) - peak).exp());
        }
        return peak + acc.value().ln();
    }

    // first s with term(s+1) ≤ term(s); the forward difference is nonincreasing
    let diff = |s: u64| term(s + 1) - term(s);
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let mid = a + (b - a) / 2;
        if diff(mid) <= 0.0 {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    let peak_at = a;
    let peak = term(peak_at);
    let mut acc = CompensatedSum::default();
    acc.add(1.0);

    let negligible = |t: f64, step: f64| {
        // remaining terms shrink at least geometrically with ratio e^step
        step < 0.0 && t - (-step.exp()).ln_1p() - peak < -TAIL_CUTOFF
    };
    let mut s = peak_at;
    while s < hi {
        s += 1;
        let t = term(s);
        acc.add((t - peak).exp());
        if s < hi && negligible(t, term(s + 1) - t) {
            break;
        }
    }
    let mut s = peak_at;
    while s > lo {
        s -= 1;
        let t = term(s);
        acc.add((t - peak).exp());
        if s > lo && negligible(t, term(s - 1) - t) {
            break;
        }
    }
    peak + acc.value().ln()
}

fn bound_with_limit(n: u64, q: Modulus, tau: f64, full_limit: u64) -> AnalyticBoundResult {
    assert!(n >= 3, "n must be at least 3");
    assert!(tau > 0.0, "threshold must be positive");
    let qf = q.get() as f64;
    let q2 = qf * qf;
    let (ln_q, ln_q1) = (qf.ln(), (qf - 1.0).ln());
    let lgn = libm::lgamma(n as f64 + 1.0);
    let ln_c = |s: u64| lgn - libm::lgamma(s as f64 + 1.0) - libm::lgamma((n - s) as f64 + 1.0);

    let log_s1 = log_sum_concave(1, n, |s| ln_c(s) + s as f64 * (ln_q - tau / q2), full_limit);
    let start = tau.ceil().max(1.0);
    let log_s2 = if start > n as f64 {
        f64::NEG_INFINITY
    } else {
        let sf = |s: u64| s as f64;
        log_sum_concave(
            start as u64,
            n,
            |s| ln_c(s) + sf(s) * ln_q1 - sf(s) * sf(s) / (20.0 * q2),
            full_limit,
        )
    };
    AnalyticBoundResult {
        log_s1,
        log_s2,
        log_total: log_add_exp(log_s1, log_s2),
    }
}

/// Evaluates both sums in log space. Admissible for very large `n`.
pub fn analytic_error_bound(n: u64, q: Modulus, tau: f64) -> AnalyticBoundResult {
    bound_with_limit(n, q, tau, FULL_SUM_LIMIT)
}

/// Plain floating-point `(S1, S2)` with binomials built by the multiplicative
/// recurrence. Overflows to infinity for large `n`.
pub fn direct_error_bound(n: u64, q: Modulus, tau: f64) -> (f64, f64) {
    let qf = q.get() as f64;
    let q2 = qf * qf;
    let mut binom = 1.0f64;
    let (mut s1, mut s2) = (CompensatedSum::default(), CompensatedSum::default());
    for s in 1..=n {
        binom = binom * (n - s + 1) as f64 / s as f64;
        let sf = s as f64;
        s1.add(binom * qf.powf(sf) * (-sf * tau / q2).exp());
        if sf >= tau.ceil() {
            s2.add(binom * (qf - 1.0).powf(sf) * (-sf * sf / (20.0 * q2)).exp());
        }
    }
    (s1.value(), s2.value())
}
