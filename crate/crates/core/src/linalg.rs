//! Rank, nullity and kernels over `ℤ_q`, and exact integer determinants.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::SignMatrix;
use crate::modulus::Modulus;
use crate::vector::ResidueVector;

/// Kernels are enumerated only while `q^nullity ≤ 2^20`.
pub const MAX_KERNEL_LOG2: f64 = 20.0;
/// Dimension guard for exact integer determinants.
pub const MAX_DET_DIM: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RankResult {
    pub rank: usize,
    pub nullity: usize,
    /// The kernel has `q^kernel_size_exponent` elements.
    pub kernel_size_exponent: usize,
}

impl RankResult {
    fn new(n: usize, rank: usize) -> Self {
        RankResult {
            rank,
            nullity: n - rank,
            kernel_size_exponent: n - rank,
        }
    }

    /// `q^nullity`, if it fits comfortably in 62 bits.
    pub fn kernel_size(&self, q: Modulus) -> Option<u64> {
        if self.nullity as f64 * (q.get() as f64).log2() > 62.0 {
            return None;
        }
        q.get().checked_pow(self.nullity as u32)
    }
}

/// Dense row-major matrix over `ℤ_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZqMatrix {
    q: Modulus,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ZqMatrix {
    pub fn from_sign_matrix(m: &SignMatrix, q: Modulus) -> Self {
        let n = m.n();
        let data = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| q.sign(m.is_negative(i, j)))
            .collect();
        ZqMatrix {
            q,
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn from_rows(q: Modulus, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend(r.iter().map(|&x| q.reduce(x)));
        }
        Ok(ZqMatrix {
            q,
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduces in place to reduced row echelon form and returns the pivot
    /// columns. The pivot in each column is the first row (in current order)
    /// holding a nonzero entry.
    pub fn row_reduce(&mut self) -> Vec<usize> {
        let q = self.q;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.at(i, c) != 0) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = q.inv(self.at(r, c)).expect("pivot is nonzero");
            for j in c..cols {
                let idx = r * cols + j;
                self.data[idx] = q.mul(self.data[idx], inv);
            }
            for i in 0..self.rows {
                let f = self.at(i, c);
                if i == r || f == 0 {
                    continue;
                }
                for j in c..cols {
                    let v = q.mul(f, self.data[r * cols + j]);
                    let idx = i * cols + j;
                    self.data[idx] = q.sub(self.data[idx], v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().row_reduce().len()
    }
}

/// Rank of `M` over `ℤ_q` by Gaussian elimination.
pub fn rank_mod_q(m: &SignMatrix, q: Modulus) -> RankResult {
    let n = m.n();
    RankResult::new(n, ZqMatrix::from_sign_matrix(m, q).rank())
}

/// Every solution of `M·x ≡ 0 (mod q)`, zero vector included, each exactly once.
pub struct KernelVectors {
    q: Modulus,
    n: usize,
    basis: Vec<Vec<u64>>,
    counter: Vec<u64>,
    done: bool,
}

impl Iterator for KernelVectors {
    type Item = ResidueVector;

    fn next(&mut self) -> Option<ResidueVector> {
        if self.done {
            return None;
        }
        let q = self.q;
        let mut x = vec![0u64; self.n];
        for (coef, b) in self.counter.iter().zip(&self.basis) {
            if *coef != 0 {
                for (xi, &bi) in x.iter_mut().zip(b) {
                    *xi = q.add(*xi, q.mul(*coef, bi));
                }
            }
        }
        // advance the base-q counter over the free coordinates
        self.done = true;
        for digit in self.counter.iter_mut() {
            *digit += 1;
            if *digit < q.get() {
                self.done = false;
                break;
            }
            *digit = 0;
        }
        Some(ResidueVector::new(q, x).expect("entries are reduced"))
    }
}

pub fn kernel_vectors(m: &SignMatrix, q: Modulus) -> Result<KernelVectors> {
    let n = m.n();
    let mut a = ZqMatrix::from_sign_matrix(m, q);
    let pivots = a.row_reduce();
    let nullity = n - pivots.len();
    if nullity as f64 * (q.get() as f64).log2() > MAX_KERNEL_LOG2 + 1e-9 {
        return Err(Error::KernelTooLarge { q: q.get(), nullity });
    }
    let mut is_pivot = vec![false; n];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let basis = (0..n)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![0u64; n];
            v[f] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = q.neg(a.at(r, f));
            }
            v
        })
        .collect::<Vec<_>>();
    Ok(KernelVectors {
        q,
        n,
        counter: vec![0; basis.len()],
        basis,
        done: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DetResult {
    pub value: i64,
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn det_integer(m: &SignMatrix) -> Result<DetResult> {
    let n = m.n();
    if n > MAX_DET_DIM {
        return Err(Error::DimensionOutOfRange { n, max: MAX_DET_DIM });
    }
    let mut a: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(m.entry(i, j))).collect())
        .collect();
    Ok(DetResult { value: bareiss(&mut a) })
}

/// Bareiss elimination on a square integer matrix. Every intermediate value is
/// a minor of the input, so for `±1` input they obey Hadamard's bound.
pub(crate) fn bareiss(a: &mut [Vec<i64>]) -> i64 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1i64;
    let mut prev = 1i64;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j] as i128 * a[k][k] as i128 - a[i][k] as i128 * a[k][j] as i128;
                debug_assert_eq!(num % prev as i128, 0);
                a[i][j] = (num / prev as i128) as i64;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "q")]
pub enum SingularityMode {
    Rational,
    ModQ(Modulus),
}

pub fn is_singular(m: &SignMatrix, mode: SingularityMode) -> Result<bool> {
    match mode {
        SingularityMode::Rational => Ok(det_integer(m)?.value == 0),
        SingularityMode::ModQ(q) => Ok(rank_mod_q(m, q).nullity >= 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate_symmetric;
    use crate::event::maps_to;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn q(x: u64) -> Modulus {
        Modulus::new(x).unwrap()
    }

    /// Leibniz expansion, independent of elimination.
    fn leibniz(m: &SignMatrix) -> i64 {
        fn perms(k: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in 0..k {
                if !used[i] {
                    used[i] = true;
                    cur.push(i);
                    perms(k, used, cur, out);
                    cur.pop();
                    used[i] = false;
                }
            }
        }
        let n = m.n();
        let mut all = Vec::new();
        perms(n, &mut vec![false; n], &mut Vec::new(), &mut all);
        all.iter()
            .map(|p| {
                let inversions = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| p[i] > p[j])
                    .count();
                let sign = if inversions % 2 == 0 { 1 } else { -1 };
                sign * (0..n).map(|i| i64::from(m.entry(i, p[i]))).product::<i64>()
            })
            .sum()
    }

    fn brute_kernel_count(m: &SignMatrix, modulus: Modulus) -> u64 {
        let zero = ResidueVector::zero(modulus, m.n());
        ResidueVector::all(modulus, m.n())
            .filter(|x| maps_to(m, x, &zero))
            .count() as u64
    }

    #[test]
    fn rank_examples() {
        let m = SignMatrix::from_rows(&[[1i8, -1], [-1, -1]]).unwrap();
        assert_eq!(
            rank_mod_q(&m, q(3)),
            RankResult {
                rank: 2,
                nullity: 0,
                kernel_size_exponent: 0
            }
        );

        let r = rank_mod_q(&SignMatrix::all_plus(4).unwrap(), q(3));
        assert_eq!((r.rank, r.nullity, r.kernel_size(q(3))), (1, 3, Some(27)));

        let r = rank_mod_q(&SignMatrix::all_plus(2).unwrap(), q(5));
        assert_eq!((r.rank, r.kernel_size(q(5))), (1, Some(5)));
    }

    #[test]
    fn kernel_size_not_expanded_when_huge() {
        let r = RankResult::new(64, 1);
        assert_eq!(r.kernel_size(q(3)), None);
        assert_eq!(RankResult::new(10, 10).kernel_size(q(101)), Some(1));
        assert_eq!(RankResult::new(10, 1).kernel_size(q(101)), Some(101u64.pow(9)));
    }

    #[test]
    fn kernel_examples() {
        let m = SignMatrix::from_rows(&[[1i8, -1], [-1, -1]]).unwrap();
        let k: Vec<_> = kernel_vectors(&m, q(3)).unwrap().collect();
        assert_eq!(k, vec![ResidueVector::zero(q(3), 2)]);

        let mut k: Vec<_> = kernel_vectors(&SignMatrix::all_plus(2).unwrap(), q(3))
            .unwrap()
            .map(|v| v.entries().to_vec())
            .collect();
        k.sort();
        assert_eq!(k, vec![vec![0, 0], vec![1, 2], vec![2, 1]]);

        let k: Vec<_> = kernel_vectors(&SignMatrix::all_plus(1).unwrap(), q(3))
            .unwrap()
            .collect();
        assert_eq!(k.len(), 1);
    }

    #[test]
    fn kernel_guard() {
        // all-plus 30×30 over ℤ_3 has nullity 29: 3^29 > 2^20
        let m = SignMatrix::all_plus(30).unwrap();
        assert!(matches!(
            kernel_vectors(&m, q(3)),
            Err(Error::KernelTooLarge { nullity: 29, .. })
        ));
        // 3^12 < 2^20
        assert_eq!(
            kernel_vectors(&SignMatrix::all_plus(13).unwrap(), q(3))
                .unwrap()
                .count(),
            531_441
        );
    }

    #[test]
    fn det_examples() {
        let m = |r: &[[i8; 2]; 2]| SignMatrix::from_rows(r).unwrap();
        assert_eq!(det_integer(&m(&[[1, 1], [1, 1]])).unwrap().value, 0);
        assert_eq!(det_integer(&m(&[[1, 1], [1, -1]])).unwrap().value, -2);
        assert_eq!(det_integer(&SignMatrix::all_plus(1).unwrap()).unwrap().value, 1);
        assert!(det_integer(&SignMatrix::all_plus(13).unwrap()).is_err());
    }

    #[test]
    fn singularity_examples() {
        let eq = SignMatrix::from_rows(&[[1i8, 1], [1, 1]]).unwrap();
        let h = SignMatrix::from_rows(&[[1i8, 1], [1, -1]]).unwrap();
        assert!(is_singular(&eq, SingularityMode::Rational).unwrap());
        assert!(!is_singular(&h, SingularityMode::ModQ(q(3))).unwrap());
        assert!(is_singular(&eq, SingularityMode::ModQ(q(5))).unwrap());
    }

    #[test]
    fn bareiss_matches_leibniz_exhaustively() {
        for n in 1..=4 {
            for m in enumerate_symmetric(n).unwrap() {
                assert_eq!(det_integer(&m).unwrap().value, leibniz(&m), "{m:?}");
            }
        }
    }

    #[test]
    fn bareiss_on_sampled_larger_matrices() {
        for i in 0..200 {
            let m = crate::rng::sample_symmetric(6, crate::rng::RngStream::new(5, i)).unwrap();
            let d = det_integer(&m).unwrap().value;
            assert_eq!(d, leibniz(&m));
            // Hadamard: |det| ≤ n^(n/2)
            assert!(d.unsigned_abs() <= 6u64.pow(3));
        }
        for i in 0..50 {
            let m = crate::rng::sample_symmetric(12, crate::rng::RngStream::new(5, i)).unwrap();
            let d = det_integer(&m).unwrap().value;
            assert!(d.unsigned_abs() <= 12u64.pow(6));
            for p in [3u64, 5, 7, 11, 13] {
                let sing = rank_mod_q(&m, q(p)).nullity > 0;
                assert_eq!(d.rem_euclid(p as i64) == 0, sing);
            }
        }
    }

    #[test]
    fn kernel_count_matches_brute_force() {
        for p in [3u64, 5] {
            for n in 1..=3 {
                for m in enumerate_symmetric(n).unwrap() {
                    let r = rank_mod_q(&m, q(p));
                    let count = kernel_vectors(&m, q(p)).unwrap().count() as u64;
                    assert_eq!(Some(count), r.kernel_size(q(p)));
                    assert_eq!(count, brute_kernel_count(&m, q(p)));
                }
            }
        }
    }

    #[test]
    fn kernel_vectors_are_distinct_solutions() {
        let m = SignMatrix::all_plus(5).unwrap();
        let zero = ResidueVector::zero(q(5), 5);
        let ks: std::collections::HashSet<_> = kernel_vectors(&m, q(5)).unwrap().collect();
        assert_eq!(ks.len(), 625);
        assert!(ks.iter().all(|x| maps_to(&m, x, &zero)));
    }

    #[test]
    fn rank_is_invariant_under_row_order() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for i in 0..300 {
            let m = crate::rng::sample_symmetric(8, crate::rng::RngStream::new(3, i)).unwrap();
            for p in [3u64, 5, 7] {
                let base = ZqMatrix::from_sign_matrix(&m, q(p));
                let mut order: Vec<usize> = (0..8).collect();
                order.shuffle(&mut rng);
                let rows: Vec<Vec<u64>> = order.iter().map(|&r| base.data[r * 8..(r + 1) * 8].to_vec()).collect();
                let shuffled = ZqMatrix::from_rows(q(p), &rows).unwrap();
                assert_eq!(shuffled.rank(), base.rank());
            }
        }
    }
}
