//! Reference computations that do not share code paths with the engine's
//! fast data structures, or that are exact.
//!
//! [`enumerate_exact`] walks every edge sequence of length `t` on a small cube
//! and returns exact rational laws. [`naive_cycle_decomposition`] composes
//! transpositions on a plain array. [`uniform_permutation_reference`] samples
//! uniform permutations for the top cycle spectrum.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::engine::{replay, RunConfig, SnapshotSchedule, Threshold};
use crate::error::{Error, Result};
use crate::graph::{Edge, Hypercube, Topology, Vertex};
use crate::stats::SpectrumEstimate;

/// Largest number of edge sequences [`enumerate_exact`] will walk.
pub const ENUMERATION_BUDGET: u128 = 10_000_000;

/// Quantities whose exact law the enumerator can compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    /// `N_t`.
    Cycles,
    /// `Ñ_t`.
    Clusters,
    /// `|V_t(ℓ)|`.
    LongCycleVertices(u64),
    /// Indicator that step `t` was a split.
    SplitAtLastStep,
    /// Indicator that step `t` merged two clusters.
    CrossMergeAtLastStep,
    /// Number of splits among the first `t` steps.
    SplitCount,
    /// Number of merges inside one cluster among the first `t` steps.
    SameClusterMergeCount,
    /// Number of cluster merges among the first `t` steps.
    CrossMergeCount,
}

/// An exact probability law on integer values.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    pub probabilities: BTreeMap<i64, BigRational>,
}

impl ExactDistribution {
    fn from_counts(counts: &BTreeMap<i64, u64>, total: u128) -> Self {
        let total = BigInt::from(total);
        let probabilities =
            counts.iter().map(|(&v, &c)| (v, BigRational::new(BigInt::from(c), total.clone()))).collect();
        ExactDistribution { probabilities }
    }

    pub fn mean(&self) -> BigRational {
        self.probabilities
            .iter()
            .fold(BigRational::zero(), |acc, (&v, p)| acc + p * BigRational::from_integer(v.into()))
    }

    pub fn probability(&self, value: i64) -> BigRational {
        self.probabilities.get(&value).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn total_mass(&self) -> BigRational {
        self.probabilities.values().fold(BigRational::zero(), |a, p| a + p)
    }

    pub fn is_normalized(&self) -> bool {
        self.total_mass() == BigRational::one()
    }
}

/// Number of edge sequences of length `t` on `Q_n`, if representable.
pub fn sequence_count(dimension: u32, t: u64) -> Option<u128> {
    let edges = u128::from(dimension) << dimension.saturating_sub(1);
    let exp = u32::try_from(t).ok()?;
    edges.checked_pow(exp)
}

fn check_budget(dimension: u32, t: u64) -> Result<(Hypercube, u128)> {
    let q = Hypercube::new(dimension)?;
    match sequence_count(dimension, t) {
        Some(s) if s <= ENUMERATION_BUDGET => Ok((q, s)),
        Some(s) => Err(Error::BudgetExceeded { sequences: s, budget: ENUMERATION_BUDGET }),
        None => Err(Error::BudgetExceeded { sequences: u128::MAX, budget: ENUMERATION_BUDGET }),
    }
}

/// Calls `f` on every edge sequence of length `t` on `Q_n`, in lexicographic
/// order of dense edge indices. Refuses if the count exceeds the budget.
pub fn for_each_sequence(dimension: u32, t: u64, mut f: impl FnMut(&[Edge]) -> Result<()>) -> Result<u128> {
    let (q, total) = check_budget(dimension, t)?;
    let m = q.edge_count();
    let t = t as usize;
    let mut idx = vec![0u64; t];
    let mut seq: Vec<Edge> = vec![q.edge_at(0).expect("cube has an edge"); t];
    loop {
        for (slot, &i) in seq.iter_mut().zip(&idx) {
            *slot = q.edge_at(i).expect("index below edge count");
        }
        f(&seq)?;
        let mut pos = t;
        loop {
            if pos == 0 {
                return Ok(total);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < m {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn observe(config: &RunConfig, edges: &[Edge], observables: &[Observable]) -> Result<Vec<i64>> {
    let t = edges.len() as u64;
    let record = replay(config, edges)?.record;
    let last = record.at(t).expect("final snapshot is always recorded");
    let prev = record.at(t.saturating_sub(1)).expect("schedule includes t - 1");
    Ok(observables
        .iter()
        .map(|o| match *o {
            Observable::Cycles => last.cycles as i64,
            Observable::Clusters => last.clusters as i64,
            Observable::LongCycleVertices(ell) => {
                let col = record.threshold_column(ell).expect("threshold was requested");
                last.long_cycle_vertices[col] as i64
            }
            Observable::SplitAtLastStep => i64::from(t > 0 && last.counts.splits > prev.counts.splits),
            Observable::CrossMergeAtLastStep => {
                i64::from(t > 0 && last.counts.merges_cross_cluster > prev.counts.merges_cross_cluster)
            }
            Observable::SplitCount => last.counts.splits as i64,
            Observable::SameClusterMergeCount => last.counts.merges_same_cluster as i64,
            Observable::CrossMergeCount => last.counts.merges_cross_cluster as i64,
        })
        .collect())
}

/// Exact laws of several observables at time `t` on `Q_n`, from one pass over
/// all `(Nn/2)^t` equally likely edge sequences.
pub fn enumerate_exact_many(dimension: u32, t: u64, observables: &[Observable]) -> Result<Vec<ExactDistribution>> {
    let (q, total) = check_budget(dimension, t)?;
    let mut config = RunConfig::new(dimension, t);
    config.schedule = SnapshotSchedule::at([t.saturating_sub(1)]);
    config.thresholds = observables
        .iter()
        .filter_map(|o| match o {
            Observable::LongCycleVertices(ell) => Some(Threshold::Absolute(*ell)),
            _ => None,
        })
        .collect();

    type Tally = Vec<BTreeMap<i64, u64>>;
    let empty = || -> Tally { vec![BTreeMap::new(); observables.len()] };
    let merge = |mut a: Tally, b: Tally| -> Tally {
        for (x, y) in a.iter_mut().zip(b) {
            for (v, c) in y {
                *x.entry(v).or_default() += c;
            }
        }
        a
    };

    let tallies: Tally = if t == 0 {
        let mut tally = empty();
        for (slot, v) in tally.iter_mut().zip(observe(&config, &[], observables)?) {
            *slot.entry(v).or_default() += 1;
        }
        tally
    } else {
        (0..q.edge_count())
            .into_par_iter()
            .map(|first| -> Result<Tally> {
                let head = q.edge_at(first).expect("index below edge count");
                let mut tally = empty();
                let mut seq = Vec::with_capacity(t as usize);
                for_each_sequence(dimension, t - 1, |tail| {
                    seq.clear();
                    seq.push(head);
                    seq.extend_from_slice(tail);
                    for (slot, v) in tally.iter_mut().zip(observe(&config, &seq, observables)?) {
                        *slot.entry(v).or_default() += 1;
                    }
                    Ok(())
                })?;
                Ok(tally)
            })
            .try_reduce(empty, |a, b| Ok(merge(a, b)))?
    };
    Ok(tallies.iter().map(|c| ExactDistribution::from_counts(c, total)).collect())
}

/// Exact law of one observable at time `t` on `Q_n`.
pub fn enumerate_exact(dimension: u32, t: u64, observable: Observable) -> Result<ExactDistribution> {
    Ok(enumerate_exact_many(dimension, t, &[observable])?.remove(0))
}

/// Cycle lengths of `τ_{e_t}∘…∘τ_{e_1}` on `vertices` points, sorted descending,
/// by explicit array composition and an orbit scan.
pub fn naive_cycle_decomposition(edges: &[Edge], vertices: usize) -> Vec<u64> {
    // sigma[v] is the image of v; position[w] is the preimage of w.
    let mut sigma: Vec<Vertex> = (0..vertices as Vertex).collect();
    let mut position: Vec<Vertex> = sigma.clone();
    for e in edges {
        let (a, b) = e.endpoints();
        let (pa, pb) = (position[a as usize], position[b as usize]);
        sigma[pa as usize] = b;
        sigma[pb as usize] = a;
        position.swap(a as usize, b as usize);
    }
    orbit_lengths(&sigma)
}

fn orbit_lengths(perm: &[Vertex]) -> Vec<u64> {
    let mut seen = vec![false; perm.len()];
    let mut lengths = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            v = perm[v] as usize;
            len += 1;
        }
        lengths.push(len);
    }
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    lengths
}

/// Mean normalized top-`m` cycle lengths of a uniform permutation of `vertices`
/// points, estimated from `samples` draws.
pub fn uniform_permutation_reference<R: Rng + ?Sized>(
    vertices: usize,
    m: usize,
    samples: usize,
    rng: &mut R,
) -> SpectrumEstimate {
    let mut perm: Vec<Vertex> = (0..vertices as Vertex).collect();
    let tops: Vec<Vec<u64>> = (0..samples)
        .map(|_| {
            perm.shuffle(rng);
            let mut lengths = orbit_lengths(&perm);
            lengths.truncate(m);
            lengths
        })
        .collect();
    SpectrumEstimate::from_tops(&tops, vertices as u64, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::replay;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    #[test]
    fn one_dimensional_cube_alternates() {
        for t in 0..6u64 {
            let d = enumerate_exact(1, t, Observable::Cycles).unwrap();
            let expected = if t % 2 == 0 { 2 } else { 1 };
            assert_eq!(d.probability(expected), BigRational::one(), "t = {t}");
        }
    }

    #[test]
    fn square_after_one_and_two_steps() {
        let d1 = enumerate_exact(2, 1, Observable::Cycles).unwrap();
        assert_eq!(d1.probability(3), BigRational::one());
        let d2 = enumerate_exact(2, 2, Observable::Cycles).unwrap();
        // Same edge twice (1/4) gives 4 cycles, otherwise 2.
        assert_eq!(d2.probability(4), r(1, 4));
        assert_eq!(d2.probability(2), r(3, 4));
        assert_eq!(d2.mean(), r(5, 2));
        assert!(d2.is_normalized());
    }

    #[test]
    fn first_step_always_merges_clusters() {
        let d = enumerate_exact(3, 1, Observable::CrossMergeAtLastStep).unwrap();
        assert_eq!(d.probability(1), BigRational::one());
    }

    #[test]
    fn bookkeeping_identity_in_exact_arithmetic() {
        for (n, t) in [(2u32, 4u64), (3, 3), (4, 2)] {
            let laws = enumerate_exact_many(
                n,
                t,
                &[Observable::Cycles, Observable::Clusters, Observable::SplitCount, Observable::SameClusterMergeCount],
            )
            .unwrap();
            let means: Vec<BigRational> = laws.iter().map(ExactDistribution::mean).collect();
            assert_eq!(&means[0] - &means[1], &means[2] - &means[3], "n = {n}, t = {t}");
        }
    }

    #[test]
    fn cross_merge_probability_is_non_increasing() {
        let mut previous = BigRational::one();
        for t in 1..=5 {
            let p = enumerate_exact(2, t, Observable::CrossMergeAtLastStep).unwrap().probability(1);
            assert!(p <= previous, "t = {t}: {p} > {previous}");
            previous = p;
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(enumerate_exact(4, 6, Observable::Cycles), Err(Error::BudgetExceeded { .. })));
        assert_eq!(sequence_count(2, 3), Some(64));
        assert_eq!(sequence_count(1, 0), Some(1));
    }

    #[test]
    fn long_cycle_observable() {
        let d = enumerate_exact(2, 3, Observable::LongCycleVertices(3)).unwrap();
        // After three steps only a 4-cycle puts vertices above length 3.
        let four = enumerate_exact(2, 3, Observable::Cycles).unwrap().probability(1);
        assert_eq!(d.probability(4), four);
    }

    #[test]
    fn naive_decomposition_examples() {
        let e = |a, b| Edge::new(a, b).unwrap();
        assert_eq!(naive_cycle_decomposition(&[], 4), vec![1, 1, 1, 1]);
        assert_eq!(naive_cycle_decomposition(&[e(0, 1)], 4), vec![2, 1, 1]);
        assert_eq!(naive_cycle_decomposition(&[e(0, 1), e(1, 3)], 4), vec![3, 1]);
        assert_eq!(naive_cycle_decomposition(&[e(0, 1), e(1, 3), e(3, 2)], 4), vec![4]);
        assert_eq!(naive_cycle_decomposition(&[e(0, 1), e(0, 1)], 4), vec![1, 1, 1, 1]);
    }

    #[test]
    fn naive_decomposition_matches_engine_on_all_short_sequences() {
        let config = RunConfig::new(2, 3);
        for_each_sequence(2, 3, |seq| {
            let out = replay(&config, seq).unwrap();
            assert_eq!(out.record.final_snapshot().unwrap().cycles, naive_cycle_decomposition(seq, 4).len() as u64);
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn uniform_reference_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Largest cycle fraction of a uniform permutation of 2 points: (1/2 + 1)/2.
        let s = uniform_permutation_reference(2, 1, 100_000, &mut rng);
        assert!((s.means[0] - 0.75).abs() <= 3.0 * s.stderrs[0]);
        // Of 3 points: (1/3 + 3·2/3 + 2·1)/6 = 13/18.
        let s = uniform_permutation_reference(3, 1, 100_000, &mut rng);
        assert!((s.means[0] - 13.0 / 18.0).abs() <= 3.0 * s.stderrs[0]);
    }

    #[test]
    fn uniform_reference_large_n_near_golomb_dickman() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = uniform_permutation_reference(4096, 3, 4000, &mut rng);
        assert!((s.means[0] - 0.624_33).abs() <= 3.0 * s.stderrs[0], "{:?}", s);
        assert!(s.means[0] > s.means[1] && s.means[1] > s.means[2]);
    }
}
