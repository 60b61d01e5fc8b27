//! Graph topologies the interchange process runs on.
//!
//! Vertices are integers `0..N`. On the hypercube `Q_n` the binary expansion of a
//! vertex is its coordinate vector, so adjacency is a single XOR and no adjacency
//! lists are stored.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = u32;

/// Largest supported hypercube dimension. Vertex ids must fit in a `u32`.
pub const MAX_DIMENSION: u32 = 30;

/// An undirected edge stored with `lo < hi`, so each edge has a unique key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    lo: Vertex,
    hi: Vertex,
}

impl Edge {
    /// Canonicalizes the endpoint order. Returns `None` for a loop.
    pub fn new(a: Vertex, b: Vertex) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Edge { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Some(Edge { lo: b, hi: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn lo(self) -> Vertex {
        self.lo
    }

    pub fn hi(self) -> Vertex {
        self.hi
    }

    pub fn endpoints(self) -> (Vertex, Vertex) {
        (self.lo, self.hi)
    }
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{}, {}}}", self.lo, self.hi)
    }
}

/// The minimal interface the simulation needs from a graph.
pub trait Topology: Send + Sync {
    fn vertex_count(&self) -> usize;

    fn edge_count(&self) -> u64;

    /// Uniform draw from the edge set.
    fn sample_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> Edge;

    fn contains_edge(&self, e: Edge) -> bool;

    fn for_each_neighbour<F: FnMut(Vertex)>(&self, v: Vertex, f: F);

    /// `|E(A)|`, the number of edges with both endpoints in `set`. Duplicates in
    /// `set` are ignored.
    fn induced_edge_count(&self, set: &[Vertex]) -> u64 {
        let mut member = vec![false; self.vertex_count()];
        for &v in set {
            member[v as usize] = true;
        }
        let mut count = 0;
        for (v, _) in member.iter().enumerate().filter(|(_, &m)| m) {
            let v = v as Vertex;
            self.for_each_neighbour(v, |w| {
                if w > v && member[w as usize] {
                    count += 1;
                }
            });
        }
        count
    }

    fn check_vertex(&self, v: u64) -> Result<Vertex> {
        if v < self.vertex_count() as u64 {
            Ok(v as Vertex)
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                vertex_count: self.vertex_count() as u64,
            })
        }
    }
}

/// The hypercube `Q_n = {0,1}^n` with nearest-neighbour edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypercube {
    dimension: u32,
}

impl Hypercube {
    pub fn new(dimension: u32) -> Result<Self> {
        if dimension == 0 || dimension > MAX_DIMENSION {
            return Err(Error::InvalidDimension(dimension));
        }
        Ok(Hypercube { dimension })
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    /// `N = 2^n`.
    pub fn vertices(&self) -> usize {
        1usize << self.dimension
    }

    /// The `n` vertices obtained by flipping one coordinate of `v`, lowest bit first.
    pub fn neighbours(&self, v: u64) -> Result<Vec<Vertex>> {
        let v = self.check_vertex(v)?;
        Ok((0..self.dimension).map(|i| v ^ (1 << i)).collect())
    }

    /// The coordinate an edge flips.
    pub fn direction(&self, e: Edge) -> Option<u32> {
        let diff = e.lo ^ e.hi;
        (diff.count_ones() == 1 && (e.hi as usize) < self.vertices()).then(|| diff.trailing_zeros())
    }

    /// Dense index in `0..edge_count`: direction-major, then the vertex with the
    /// flipped bit removed.
    pub fn edge_index(&self, e: Edge) -> Option<u64> {
        let i = self.direction(e)?;
        let low = e.lo & ((1 << i) - 1);
        let high = (e.lo >> (i + 1)) << i;
        Some(u64::from(i) * (self.vertices() as u64 / 2) + u64::from(high | low))
    }

    /// Inverse of [`Hypercube::edge_index`].
    pub fn edge_at(&self, index: u64) -> Option<Edge> {
        let half = self.vertices() as u64 / 2;
        if index >= self.edge_count() {
            return None;
        }
        let i = (index / half) as u32;
        let rest = (index % half) as Vertex;
        let low = rest & ((1 << i) - 1);
        let high = (rest >> i) << (i + 1);
        let lo = high | low;
        Edge::new(lo, lo | (1 << i))
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.edge_count()).map(move |k| self.edge_at(k).expect("index in range"))
    }
}

impl Topology for Hypercube {
    fn vertex_count(&self) -> usize {
        self.vertices()
    }

    fn edge_count(&self) -> u64 {
        self.vertices() as u64 * u64::from(self.dimension) / 2
    }

    /// Uniform vertex and uniform coordinate; every edge is reachable from both of
    /// its endpoints, so the result is uniform over `E_n`.
    fn sample_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> Edge {
        let v = rng.random_range(0..self.vertices() as u32);
        let i = rng.random_range(0..self.dimension);
        Edge::new(v, v ^ (1 << i)).expect("bit flip changes the vertex")
    }

    fn contains_edge(&self, e: Edge) -> bool {
        self.direction(e).is_some()
    }

    fn for_each_neighbour<F: FnMut(Vertex)>(&self, v: Vertex, mut f: F) {
        for i in 0..self.dimension {
            f(v ^ (1 << i));
        }
    }
}

/// The complete graph `K_N`, kept for cross-checks against the mean-field case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompleteGraph {
    vertices: u32,
}

impl CompleteGraph {
    pub fn new(vertices: u32) -> Result<Self> {
        if vertices < 2 {
            return Err(Error::Config(format!(
                "complete graph needs at least 2 vertices, got {vertices}"
            )));
        }
        Ok(CompleteGraph { vertices })
    }
}

impl Topology for CompleteGraph {
    fn vertex_count(&self) -> usize {
        self.vertices as usize
    }

    fn edge_count(&self) -> u64 {
        let n = u64::from(self.vertices);
        n * (n - 1) / 2
    }

    fn sample_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> Edge {
        let a = rng.random_range(0..self.vertices);
        let mut b = rng.random_range(0..self.vertices - 1);
        if b >= a {
            b += 1;
        }
        Edge::new(a, b).expect("distinct endpoints")
    }

    fn contains_edge(&self, e: Edge) -> bool {
        e.hi < self.vertices
    }

    fn for_each_neighbour<F: FnMut(Vertex)>(&self, v: Vertex, mut f: F) {
        (0..self.vertices).filter(|&w| w != v).for_each(&mut f);
    }
}

/// Right-hand side of the hypercube isoperimetric inequality, `½|A| log₂|A|`
/// (zero for `|A| ≤ 1`).
pub fn isoperimetric_bound(set_size: usize) -> f64 {
    if set_size <= 1 {
        0.0
    } else {
        let s = set_size as f64;
        0.5 * s * s.log2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<Vertex>) -> Vec<Vertex> {
        v.sort_unstable();
        v
    }

    #[test]
    fn neighbours_by_bit_flip() {
        assert_eq!(Hypercube::new(1).unwrap().neighbours(0).unwrap(), vec![1]);
        assert_eq!(sorted(Hypercube::new(3).unwrap().neighbours(0).unwrap()), vec![1, 2, 4]);
        assert_eq!(sorted(Hypercube::new(2).unwrap().neighbours(3).unwrap()), vec![1, 2]);
    }

    #[test]
    fn neighbours_rejects_out_of_range() {
        let q = Hypercube::new(3).unwrap();
        assert!(matches!(
            q.neighbours(8),
            Err(Error::VertexOutOfRange { vertex: 8, vertex_count: 8 })
        ));
    }

    #[test]
    fn dimension_bounds() {
        assert!(Hypercube::new(0).is_err());
        assert!(Hypercube::new(MAX_DIMENSION + 1).is_err());
        assert!(Hypercube::new(MAX_DIMENSION).is_ok());
    }

    #[test]
    fn edge_counts() {
        assert_eq!(Hypercube::new(10).unwrap().edge_count(), 5120);
        assert_eq!(Hypercube::new(1).unwrap().edge_count(), 1);
        assert_eq!(CompleteGraph::new(5).unwrap().edge_count(), 10);
    }

    #[test]
    fn edge_index_is_a_bijection() {
        for n in 1..=6 {
            let q = Hypercube::new(n).unwrap();
            let edges: Vec<Edge> = q.edges().collect();
            assert_eq!(edges.len() as u64, q.edge_count());
            for (k, e) in edges.iter().enumerate() {
                assert!(q.contains_edge(*e));
                assert_eq!(q.edge_index(*e), Some(k as u64));
            }
            let mut dedup = edges.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), edges.len());
        }
    }

    #[test]
    fn non_edges_are_rejected() {
        let q = Hypercube::new(3).unwrap();
        assert!(!q.contains_edge(Edge::new(0, 3).unwrap()));
        assert!(!q.contains_edge(Edge::new(4, 12).unwrap()));
        assert_eq!(Edge::new(2, 2), None);
        assert_eq!(Edge::new(5, 1).unwrap().endpoints(), (1, 5));
    }

    #[test]
    fn single_edge_sampling() {
        let q = Hypercube::new(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(q.sample_edge(&mut rng), Edge::new(0, 1).unwrap());
        }
    }

    #[test]
    fn sampling_is_uniform_on_q2() {
        // Each of the 4 edges should appear with frequency 1/4 within 3 standard errors.
        let q = Hypercube::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(20160122);
        let draws = 100_000u64;
        let mut counts = [0u64; 4];
        for _ in 0..draws {
            counts[q.edge_index(q.sample_edge(&mut rng)).unwrap() as usize] += 1;
        }
        let p = 0.25;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        for c in counts {
            assert!((c as f64 / draws as f64 - p).abs() <= 3.0 * se, "{counts:?}");
        }
        // Pearson chi-square with 3 degrees of freedom; 16.27 is the 0.999 quantile.
        let expected = draws as f64 * p;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}");
    }

    #[test]
    fn sampling_deviation_shrinks_with_draws() {
        let q = Hypercube::new(3).unwrap();
        let p = 1.0 / q.edge_count() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut max_dev = |draws: u64| {
            let mut counts = vec![0u64; q.edge_count() as usize];
            for _ in 0..draws {
                counts[q.edge_index(q.sample_edge(&mut rng)).unwrap() as usize] += 1;
            }
            counts
                .iter()
                .map(|&c| (c as f64 / draws as f64 - p).abs())
                .fold(0.0, f64::max)
        };
        let coarse = max_dev(2_000);
        let fine = max_dev(200_000);
        // 100x the draws should cut the deviation by about 10x; allow a factor 3 of noise.
        assert!(fine < coarse / 3.0, "coarse {coarse} fine {fine}");
        let se = (p * (1.0 - p) / 200_000.0).sqrt();
        assert!(fine < 4.5 * se);
    }

    #[test]
    fn complete_graph_sampling_never_loops() {
        let k = CompleteGraph::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..1000 {
            let e = k.sample_edge(&mut rng);
            assert!(k.contains_edge(e));
            seen.insert(e);
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn induced_edges_examples() {
        let q = Hypercube::new(4).unwrap();
        assert_eq!(q.induced_edge_count(&[5]), 0);
        // 3-dimensional subcube {x : x_3 = 0}.
        let sub: Vec<Vertex> = (0..8).collect();
        assert_eq!(q.induced_edge_count(&sub), 12);
        assert_eq!(isoperimetric_bound(8), 12.0);
        // Antipodal corners of Q_2.
        let q2 = Hypercube::new(2).unwrap();
        assert_eq!(q2.induced_edge_count(&[0, 3]), 0);
        assert_eq!(isoperimetric_bound(2), 1.0);
    }

    #[test]
    fn subcubes_are_extremal() {
        let q = Hypercube::new(6).unwrap();
        for k in 0..=6u32 {
            // Subcube spanned by the top k coordinates, offset by a fixed low pattern.
            let set: Vec<Vertex> = (0..1u32 << k).map(|x| x << (6 - k)).collect();
            let expected = u64::from(k) * (1u64 << k) / 2;
            assert_eq!(q.induced_edge_count(&set), expected);
            assert_eq!(isoperimetric_bound(set.len()), expected as f64);
        }
    }

    proptest! {
        #[test]
        fn isoperimetric_inequality_holds(n in 1u32..=7, bits in proptest::collection::vec(any::<bool>(), 128)) {
            let q = Hypercube::new(n).unwrap();
            let set: Vec<Vertex> = (0..q.vertices() as Vertex).filter(|&v| bits[v as usize]).collect();
            let induced = q.induced_edge_count(&set) as f64;
            prop_assert!(induced <= isoperimetric_bound(set.len()) + 1e-9);
        }

        #[test]
        fn neighbour_relation_is_symmetric(n in 1u32..=12, v in any::<u32>()) {
            let q = Hypercube::new(n).unwrap();
            let v = v % q.vertices() as u32;
            let nb = q.neighbours(u64::from(v)).unwrap();
            prop_assert_eq!(nb.len(), n as usize);
            let mut dedup = nb.clone();
            dedup.sort_unstable();
            dedup.dedup();
            prop_assert_eq!(dedup.len(), n as usize);
            for w in nb {
                prop_assert_eq!((v ^ w).count_ones(), 1);
                prop_assert!(q.neighbours(u64::from(w)).unwrap().contains(&v));
            }
        }
    }
}
