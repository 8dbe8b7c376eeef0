//! Level sets of vectors over `ℤ_q`, the pair count `N(ℓ, a)`, and the
//! auxiliary "cancellation graph" used to lower-bound it.
//!
//! Coordinates are 0-based throughout. The structured family is governed by a
//! threshold `τ` (default `n / log² n`): a vector belongs to it when its
//! largest level set has at least `n - τ` coordinates.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modulus::{LogBase, Modulus};
use crate::vector::ResidueVector;

/// Support size from which the `s²/20` claim is enforced as a violation.
pub const QUADRATIC_CLAIM_MIN_SUPPORT: usize = 40;

/// `n / log² n`. Infinite when `log n = 0`.
pub fn default_tau(n: usize, base: LogBase) -> f64 {
    let l = base.log(n as f64);
    if l <= 0.0 {
        f64::INFINITY
    } else {
        n as f64 / (l * l)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSetProfile {
    pub n: usize,
    /// Nonempty level sets `L_r(a)`, keyed by residue.
    pub level_sets: BTreeMap<u64, Vec<usize>>,
    /// Size of the largest level set, `m(a)`.
    pub m: usize,
    pub tau: f64,
    /// Membership in the structured family: `m ≥ n - τ`.
    pub in_family: bool,
}

impl LevelSetProfile {
    pub fn level_set(&self, r: u64) -> &[usize] {
        self.level_sets.get(&r).map_or(&[], Vec::as_slice)
    }

    /// `|L_{≠r}(a)|`.
    pub fn outside_level(&self, r: u64) -> usize {
        self.n - self.level_set(r).len()
    }
}

pub fn level_set_profile(a: &ResidueVector, tau: f64) -> Result<LevelSetProfile> {
    check_tau(tau)?;
    let mut level_sets: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, &x) in a.entries().iter().enumerate() {
        level_sets.entry(x).or_default().push(i);
    }
    let n = a.len();
    let m = level_sets.values().map(Vec::len).max().unwrap_or(0);
    Ok(LevelSetProfile {
        n,
        level_sets,
        m,
        tau,
        in_family: m as f64 >= n as f64 - tau,
    })
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "threshold must be positive, got {tau}"
        )))
    }
}

#[inline]
fn pair_term(q: Modulus, l: &[u64], a: &[u64], i: usize, j: usize) -> u64 {
    q.add(q.mul(l[i], a[j]), q.mul(l[j], a[i]))
}

/// `N(ℓ, a)`: unordered pairs `i < j` with `ℓ_i a_j + ℓ_j a_i ≢ 0`.
pub fn count_nonzero_pairs(l: &ResidueVector, a: &ResidueVector) -> Result<usize> {
    l.check_compatible(a)?;
    let (q, n) = (a.modulus(), a.len());
    let (le, ae) = (l.entries(), a.entries());
    Ok((0..n)
        .map(|i| (i + 1..n).filter(|&j| pair_term(q, le, ae, i, j) != 0).count())
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportRegime {
    SmallSupport,
    LargeSupport,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairCountReport {
    /// `|L_{≠0}(ℓ)|`.
    pub s: usize,
    #[serde(rename = "N")]
    pub pairs: usize,
    /// `s·τ/2`, i.e. `sn / (2 log² n)` at the default threshold.
    pub bound_p1: f64,
    /// `min(s²/20, bound_p1)`.
    pub bound_p2: f64,
    pub regime: SupportRegime,
}

pub fn pair_count(l: &ResidueVector, a: &ResidueVector, tau: f64) -> Result<PairCountReport> {
    check_tau(tau)?;
    let pairs = count_nonzero_pairs(l, a)?;
    let s = l.support_size();
    let bound_p1 = s as f64 * tau / 2.0;
    let bound_p2 = (s as f64 * s as f64 / 20.0).min(bound_p1);
    let regime = if (s as f64) < tau / 2.0 {
        SupportRegime::SmallSupport
    } else {
        SupportRegime::LargeSupport
    };
    Ok(PairCountReport {
        s,
        pairs,
        bound_p1,
        bound_p2,
        regime,
    })
}

/// Graph on the coordinates where both `a` and `ℓ` are nonzero, with an edge
/// wherever the pair term cancels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuxiliaryGraph {
    /// Coordinates, increasing.
    pub vertices: Vec<usize>,
    /// Edges as coordinate pairs `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
    /// `J_r = L_r(a) ∩ L_{≠0}(ℓ)` for `r ≠ 0`.
    pub classes: BTreeMap<u64, Vec<usize>>,
    #[serde(skip)]
    adjacency: Vec<Vec<bool>>,
}

impl AuxiliaryGraph {
    /// A graph with explicit edges between positions of `vertices`; used for
    /// fixtures that do not come from a pair of vectors.
    pub fn from_edges(vertices: Vec<usize>, edges: &[(usize, usize)]) -> Result<Self> {
        let pos = |c: usize| {
            vertices
                .iter()
                .position(|&v| v == c)
                .ok_or_else(|| Error::InvalidParameter(format!("{c} is not a vertex")))
        };
        let k = vertices.len();
        let mut adjacency = vec![vec![false; k]; k];
        let mut normalized = Vec::new();
        for &(x, y) in edges {
            let (px, py) = (pos(x)?, pos(y)?);
            if px == py {
                return Err(Error::InvalidParameter("self loop".into()));
            }
            if !adjacency[px][py] {
                adjacency[px][py] = true;
                adjacency[py][px] = true;
                normalized.push((x.min(y), x.max(y)));
            }
        }
        normalized.sort_unstable();
        Ok(AuxiliaryGraph {
            vertices,
            edges: normalized,
            classes: BTreeMap::new(),
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Pairs of vertices that are not adjacent: `C(|V|, 2) - e(G)`.
    pub fn non_edge_count(&self) -> usize {
        let v = self.vertex_count();
        v * v.saturating_sub(1) / 2 - self.edge_count()
    }

    /// Adjacency by vertex position.
    pub fn adjacent(&self, x: usize, y: usize) -> bool {
        self.adjacency[x][y]
    }
}

/// `⌊v²/4⌋`, the most edges a triangle-free graph on `v` vertices can have.
pub fn mantel_edge_limit(v: usize) -> usize {
    v * v / 4
}

pub fn build_auxiliary_graph(a: &ResidueVector, l: &ResidueVector) -> Result<AuxiliaryGraph> {
    l.check_compatible(a)?;
    let q = a.modulus();
    let (le, ae) = (l.entries(), a.entries());
    let vertices: Vec<usize> = (0..a.len()).filter(|&i| ae[i] != 0 && le[i] != 0).collect();
    let k = vertices.len();
    let mut adjacency = vec![vec![false; k]; k];
    let mut edges = Vec::new();
    for x in 0..k {
        for y in x + 1..k {
            let (i, j) = (vertices[x], vertices[y]);
            if pair_term(q, le, ae, i, j) == 0 {
                adjacency[x][y] = true;
                adjacency[y][x] = true;
                edges.push((i, j));
            }
        }
    }
    let mut classes: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for &i in &vertices {
        classes.entry(ae[i]).or_default().push(i);
    }
    Ok(AuxiliaryGraph {
        vertices,
        edges,
        classes,
        adjacency,
    })
}

/// Brute force over vertex triples.
pub fn is_triangle_free(g: &AuxiliaryGraph) -> bool {
    let k = g.vertex_count();
    for x in 0..k {
        for y in x + 1..k {
            if !g.adjacency[x][y] {
                continue;
            }
            if (y + 1..k).any(|z| g.adjacency[x][z] && g.adjacency[y][z]) {
                return false;
            }
        }
    }
    true
}

/// Everything the two pair-count propositions say about one `(a, ℓ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropositionCheck {
    /// `a` lies outside the structured family and `ℓ ≠ 0`.
    pub hypotheses_met: bool,
    pub regime: SupportRegime,
    pub s: usize,
    pub claimed_bound: f64,
    pub actual_n: usize,
    /// `actual_n ≥ claimed_bound`, or vacuously true.
    pub holds: bool,
    /// Whether a failure of `holds` counts as a violation: always in the
    /// small-support regime, and for `s ≥ 40` in the large-support regime.
    pub claim_enforced: bool,
    /// `|L_{≠0}(a)|`.
    pub support_a: usize,
    /// `s · |L_0(ℓ) ∩ L_{≠0}(a)|`, a count of guaranteed non-cancelling pairs.
    pub cross_pairs: usize,
    /// `s · (|L_{≠0}(a)| - s)` when `s ≤ |L_{≠0}(a)|`.
    pub inner_bound: Option<usize>,
    pub inner_holds: bool,
    pub graph_vertices: usize,
    pub graph_edges: usize,
    pub triangle_free: bool,
    /// Non-cancelling pairs inside `V` versus `C(|V|,2) - ⌊|V|²/4⌋`.
    pub non_edges_in_v: usize,
    pub mantel_bound: usize,
    pub mantel_holds: bool,
}

impl PropositionCheck {
    pub fn violated(&self) -> bool {
        (self.claim_enforced && !self.holds) || !self.inner_holds || !self.triangle_free || !self.mantel_holds
    }
}

pub fn check_proposition(a: &ResidueVector, l: &ResidueVector, tau: f64) -> Result<PropositionCheck> {
    let profile = level_set_profile(a, tau)?;
    let report = pair_count(l, a, tau)?;
    let s = report.s;
    let hypotheses_met = !profile.in_family && s >= 1;
    let claimed_bound = match report.regime {
        SupportRegime::SmallSupport => report.bound_p1,
        SupportRegime::LargeSupport => report.bound_p2,
    };
    let holds = !hypotheses_met || report.pairs as f64 >= claimed_bound;
    let claim_enforced =
        hypotheses_met && (report.regime == SupportRegime::SmallSupport || s >= QUADRATIC_CLAIM_MIN_SUPPORT);

    let (le, ae) = (l.entries(), a.entries());
    let support_a = profile.outside_level(0);
    let outside_l_support = (0..a.len()).filter(|&i| le[i] == 0 && ae[i] != 0).count();
    let cross_pairs = s * outside_l_support;
    let inner_bound = (s <= support_a).then(|| s * (support_a - s));
    let inner_holds = report.pairs >= cross_pairs && inner_bound.is_none_or(|b| cross_pairs >= b);

    let g = build_auxiliary_graph(a, l)?;
    let v = g.vertex_count();
    let mantel_bound = v * v.saturating_sub(1) / 2 - mantel_edge_limit(v);
    let non_edges_in_v = g.non_edge_count();
    Ok(PropositionCheck {
        hypotheses_met,
        regime: report.regime,
        s,
        claimed_bound,
        actual_n: report.pairs,
        holds,
        claim_enforced,
        support_a,
        cross_pairs,
        inner_bound,
        inner_holds,
        graph_vertices: v,
        graph_edges: g.edge_count(),
        triangle_free: is_triangle_free(&g),
        non_edges_in_v,
        mantel_bound,
        mantel_holds: g.edge_count() <= mantel_edge_limit(v) && non_edges_in_v >= mantel_bound,
    })
}

/// A failing `(a, ℓ)` in the shape written to reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub q: u64,
    pub n: usize,
    pub a: Vec<u64>,
    pub l: Vec<u64>,
    #[serde(rename = "N")]
    pub pairs: usize,
    pub bound: f64,
    pub regime: SupportRegime,
}

impl Counterexample {
    pub fn new(a: &ResidueVector, l: &ResidueVector, check: &PropositionCheck) -> Self {
        Counterexample {
            q: a.modulus().get(),
            n: a.len(),
            a: a.entries().to_vec(),
            l: l.entries().to_vec(),
            pairs: check.actual_n,
            bound: check.claimed_bound,
            regime: check.regime,
        }
    }
}

/// Uniform vector outside the structured family, by rejection.
pub fn sample_outside_family<R: Rng + ?Sized>(
    q: Modulus,
    n: usize,
    tau: f64,
    rng: &mut R,
    max_attempts: u64,
) -> Result<ResidueVector> {
    for _ in 0..max_attempts {
        let a = ResidueVector::random(q, n, rng);
        if !level_set_profile(&a, tau)?.in_family {
            return Ok(a);
        }
    }
    Err(Error::RejectionFailed { attempts: max_attempts })
}

/// Vector with exactly `s` nonzero coordinates at uniformly chosen positions,
/// nonzero values uniform in `[1, q)`.
pub fn random_with_support<R: Rng + ?Sized>(q: Modulus, n: usize, s: usize, rng: &mut R) -> ResidueVector {
    let mut entries = vec![0u64; n];
    for i in sample(rng, n, s.min(n)) {
        entries[i] = rng.random_range(1..q.get());
    }
    ResidueVector::new(q, entries).expect("entries are reduced")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(x: u64) -> Modulus {
        Modulus::new(x).unwrap()
    }

    fn v(m: u64, e: &[u64]) -> ResidueVector {
        ResidueVector::new(q(m), e.to_vec()).unwrap()
    }

    #[test]
    fn profile_examples() {
        let p = level_set_profile(&v(3, &[1, 1, 2, 0]), 1.0).unwrap();
        assert_eq!(p.level_set(0), &[3]);
        assert_eq!(p.level_set(1), &[0, 1]);
        assert_eq!(p.level_set(2), &[2]);
        assert_eq!(p.m, 2);
        assert!(!p.in_family);

        let p = level_set_profile(&v(5, &[0, 0, 0, 0]), 1.0).unwrap();
        assert_eq!(p.m, 4);
        assert!(p.in_family);

        let p = level_set_profile(&v(3, &[1, 2]), 0.5).unwrap();
        assert_eq!(p.m, 1);
        assert!(!p.in_family);

        assert!(level_set_profile(&v(3, &[1]), 0.0).is_err());
    }

    #[test]
    fn default_threshold() {
        assert!((default_tau(100, LogBase::Natural) - 4.7152).abs() < 1e-4);
        assert!(default_tau(1, LogBase::Natural).is_infinite());
        assert!((default_tau(16, LogBase::Two) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pair_count_examples() {
        let r = pair_count(&v(3, &[1, 0, 0]), &v(3, &[1, 1, 2]), 1.0).unwrap();
        assert_eq!((r.s, r.pairs), (1, 2));
        let r = pair_count(&v(3, &[0, 0, 0]), &v(3, &[1, 1, 2]), 1.0).unwrap();
        assert_eq!((r.s, r.pairs), (0, 0));
        let r = pair_count(&v(3, &[1, 2]), &v(3, &[1, 1]), 1.0).unwrap();
        assert_eq!(r.pairs, 0);
        assert!(pair_count(&v(3, &[1]), &v(3, &[1, 1]), 1.0).is_err());
    }

    #[test]
    fn pair_bounds_and_regime() {
        let tau = default_tau(100, LogBase::Natural);
        let a = ResidueVector::zero(q(5), 100);
        let l = random_with_support(q(5), 100, 2, &mut rand::rng());
        let r = pair_count(&l, &a, tau).unwrap();
        assert_eq!(r.regime, SupportRegime::SmallSupport);
        assert!((r.bound_p1 - tau).abs() < 1e-12);
        assert!((r.bound_p2 - 0.2).abs() < 1e-12);
        let l = random_with_support(q(5), 100, 3, &mut rand::rng());
        assert_eq!(pair_count(&l, &a, tau).unwrap().regime, SupportRegime::LargeSupport);
    }

    #[test]
    fn graph_examples() {
        let g = build_auxiliary_graph(&v(3, &[1, 1]), &v(3, &[1, 2])).unwrap();
        assert_eq!(g.vertices, vec![0, 1]);
        assert_eq!(g.edges, vec![(0, 1)]);

        let g = build_auxiliary_graph(&v(3, &[1, 1]), &v(3, &[1, 1])).unwrap();
        assert!(g.edges.is_empty());

        let g = build_auxiliary_graph(&v(3, &[0, 1]), &v(3, &[1, 1])).unwrap();
        assert_eq!(g.vertices, vec![1]);
        assert!(g.edges.is_empty());
        assert_eq!(g.classes.get(&1), Some(&vec![1]));
    }

    #[test]
    fn triangle_fixtures() {
        let empty = AuxiliaryGraph::from_edges(vec![], &[]).unwrap();
        assert!(is_triangle_free(&empty));
        let tri = AuxiliaryGraph::from_edges(vec![0, 1, 2], &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(!is_triangle_free(&tri));
        let path = AuxiliaryGraph::from_edges(vec![0, 1, 2, 3], &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(is_triangle_free(&path));
        assert_eq!(path.non_edge_count(), 3);
        assert!(AuxiliaryGraph::from_edges(vec![0], &[(0, 0)]).is_err());
    }

    #[test]
    fn vacuous_when_structured() {
        let a = ResidueVector::zero(q(5), 10);
        let l = v(5, &[1, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        let c = check_proposition(&a, &l, 2.0).unwrap();
        assert!(!c.hypotheses_met);
        assert!(c.holds);
        assert!(!c.violated());
    }

    #[test]
    fn zero_frequency_is_vacuous() {
        let a = v(5, &[1, 2, 3, 4, 0, 1]);
        let c = check_proposition(&a, &ResidueVector::zero(q(5), 6), 1.0).unwrap();
        assert_eq!(c.actual_n, 0);
        assert!(!c.hypotheses_met && c.holds && !c.violated());
    }

    #[test]
    fn half_zero_half_one_example() {
        let mut e = vec![0u64; 100];
        e[50..].iter_mut().for_each(|x| *x = 1);
        let a = v(5, &e);
        let mut le = vec![0u64; 100];
        le[0] = 1;
        let l = v(5, &le);
        let tau = default_tau(100, LogBase::Natural);
        let c = check_proposition(&a, &l, tau).unwrap();
        assert!(c.hypotheses_met);
        assert_eq!(c.regime, SupportRegime::SmallSupport);
        assert!((c.claimed_bound - 100.0 / (2.0 * 100f64.ln().powi(2))).abs() < 1e-12);
        assert_eq!(c.actual_n, 50);
        assert!(c.holds && c.claim_enforced && !c.violated());
    }

    #[test]
    fn quadratic_claim_can_fail_for_tiny_support() {
        // a = (1,1,0,0), ℓ = (1,2,0,0) over ℤ_3: every pair cancels, yet with
        // τ = 1 the vector a is unstructured and s = 2 lands in the
        // large-support regime.
        let c = check_proposition(&v(3, &[1, 1, 0, 0]), &v(3, &[1, 2, 0, 0]), 1.0).unwrap();
        assert!(c.hypotheses_met);
        assert_eq!(c.actual_n, 0);
        assert!(!c.holds);
        assert!(!c.claim_enforced);
        assert!(!c.violated());
    }

    #[test]
    fn rejection_sampler_reports_failure() {
        let mut rng = rand::rng();
        // τ ≥ n puts every vector in the family
        assert!(matches!(
            sample_outside_family(q(3), 2, 2.0, &mut rng, 100),
            Err(Error::RejectionFailed { attempts: 100 })
        ));
        let a = sample_outside_family(q(3), 3, 1.0, &mut rng, 10_000).unwrap();
        let mut e = a.entries().to_vec();
        e.sort();
        assert_eq!(e, vec![0, 1, 2]);
    }

    fn vec_strategy(n: usize, q: u64, nonzero: bool) -> impl Strategy<Value = Vec<u64>> {
        let lo = u64::from(nonzero);
        proptest::collection::vec(lo..q, n)
    }

    proptest! {
        #[test]
        fn level_sets_partition(e in vec_strategy(40, 7, false)) {
            let a = v(7, &e);
            let p = level_set_profile(&a, 3.0).unwrap();
            let mut all: Vec<usize> = p.level_sets.values().flatten().copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..40).collect::<Vec<_>>());
            prop_assert_eq!(p.m, p.level_sets.values().map(Vec::len).max().unwrap());
            if !p.in_family {
                for r in 0..7 {
                    prop_assert!(p.outside_level(r) as f64 > p.tau);
                }
            }
        }

        #[test]
        fn nonzero_vectors_give_triangle_free_graphs(
            qi in 0usize..5,
            n in 3usize..=50,
            seed in any::<u64>(),
        ) {
            use rand::SeedableRng;
            let modulus = q([3, 5, 7, 11, 13][qi]);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = ResidueVector::random_nonzero(modulus, n, &mut rng);
            let l = ResidueVector::random_nonzero(modulus, n, &mut rng);
            let g = build_auxiliary_graph(&a, &l).unwrap();
            prop_assert_eq!(g.vertex_count(), n);
            prop_assert!(is_triangle_free(&g));
            prop_assert!(g.edge_count() <= mantel_edge_limit(n));
        }

        #[test]
        fn cross_pairs_bound_pair_count(a in vec_strategy(30, 5, false), l in vec_strategy(30, 5, false)) {
            let (a, l) = (v(5, &a), v(5, &l));
            let c = check_proposition(&a, &l, 2.0).unwrap();
            prop_assert!(c.inner_holds);
            prop_assert!(c.mantel_holds);
            prop_assert!(c.triangle_free);
        }
    }
}
