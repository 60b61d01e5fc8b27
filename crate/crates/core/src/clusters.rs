//! Percolation clusters of the opened edges.
//!
//! Union by size with path compression, plus circular member lists so the
//! smaller side of a union can be enumerated. The number of graph edges joining
//! two different clusters is maintained exactly, which gives the conditional
//! merge hazard `p_t` without sampling.

use crate::graph::{Edge, Topology, Vertex};

#[derive(Clone, Debug)]
pub struct ClusterState {
    parent: Vec<Vertex>,
    size: Vec<u32>,
    /// Circular linked list threading the members of each cluster.
    next_member: Vec<Vertex>,
    num_clusters: u64,
    largest_root: Vertex,
    cross_edges: u64,
    edge_count: u64,
}

impl ClusterState {
    /// All vertices isolated; every edge of `topo` crosses.
    pub fn singletons<G: Topology>(topo: &G) -> Self {
        let n = topo.vertex_count();
        let ids: Vec<Vertex> = (0..n as Vertex).collect();
        ClusterState {
            parent: ids.clone(),
            size: vec![1; n],
            next_member: ids,
            num_clusters: n as u64,
            largest_root: 0,
            cross_edges: topo.edge_count(),
            edge_count: topo.edge_count(),
        }
    }

    /// `Ñ_t`.
    pub fn num_clusters(&self) -> u64 {
        self.num_clusters
    }

    pub fn largest_cluster(&self) -> u64 {
        u64::from(self.size[self.largest_root as usize])
    }

    /// Number of graph edges whose endpoints lie in different clusters.
    pub fn cross_edge_count(&self) -> u64 {
        self.cross_edges
    }

    /// Probability that the next uniform edge joins two clusters.
    pub fn merge_hazard(&self) -> f64 {
        self.cross_edges as f64 / self.edge_count as f64
    }

    pub fn find(&mut self, v: Vertex) -> Vertex {
        let mut root = v;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = v;
        while self.parent[cur as usize] != root {
            let up = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = up;
        }
        root
    }

    /// Root lookup without path compression, for read-only callers.
    pub fn root_of(&self, v: Vertex) -> Vertex {
        let mut root = v;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        root
    }

    pub fn same_cluster(&mut self, x: Vertex, y: Vertex) -> bool {
        self.find(x) == self.find(y)
    }

    pub fn cluster_size_of(&self, v: Vertex) -> u64 {
        u64::from(self.size[self.root_of(v) as usize])
    }

    /// Members of the cluster containing `v`.
    pub fn members(&self, v: Vertex) -> Vec<Vertex> {
        let mut out = vec![v];
        let mut w = self.next_member[v as usize];
        while w != v {
            out.push(w);
            w = self.next_member[w as usize];
        }
        out
    }

    /// Opens `e`. Returns `true` iff its endpoints were in different clusters.
    pub fn open_edge<G: Topology>(&mut self, topo: &G, e: Edge) -> bool {
        let (ra, rb) = (self.find(e.lo()), self.find(e.hi()));
        if ra == rb {
            return false;
        }
        let (small, big) = if self.size[ra as usize] <= self.size[rb as usize] { (ra, rb) } else { (rb, ra) };

        // Every graph edge between the two clusters stops crossing.
        let mut between = 0u64;
        let mut v = small;
        loop {
            topo.for_each_neighbour(v, |w| {
                if self.root_of(w) == big {
                    between += 1;
                }
            });
            v = self.next_member[v as usize];
            if v == small {
                break;
            }
        }
        self.cross_edges -= between;

        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        self.next_member.swap(small as usize, big as usize);
        self.num_clusters -= 1;
        if self.size[big as usize] > self.size[self.largest_root as usize] {
            self.largest_root = big;
        } else if self.largest_root == small {
            self.largest_root = big;
        }
        true
    }

    /// Number of vertices with at least `fraction·n` neighbours inside the largest
    /// cluster.
    pub fn high_degree_core<G: Topology>(&self, topo: &G, degree: usize, fraction: f64) -> u64 {
        let giant = self.root_of(self.largest_root);
        let need = fraction * degree as f64;
        (0..topo.vertex_count() as Vertex)
            .filter(|&v| {
                let mut inside = 0usize;
                topo.for_each_neighbour(v, |w| {
                    if self.root_of(w) == giant {
                        inside += 1;
                    }
                });
                inside as f64 >= need
            })
            .count() as u64
    }

    /// Cluster sizes by full scan.
    pub fn component_sizes(&self) -> Vec<u64> {
        let mut counts = std::collections::HashMap::<Vertex, u64>::new();
        for v in 0..self.parent.len() as Vertex {
            *counts.entry(self.root_of(v)).or_default() += 1;
        }
        let mut sizes: Vec<u64> = counts.into_values().collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// Recounts crossing edges from scratch.
    pub fn recount_cross_edges<G: Topology>(&self, topo: &G) -> u64 {
        let mut count = 0;
        for v in 0..topo.vertex_count() as Vertex {
            let rv = self.root_of(v);
            topo.for_each_neighbour(v, |w| {
                if w > v && self.root_of(w) != rv {
                    count += 1;
                }
            });
        }
        count
    }

    pub fn check_invariants<G: Topology>(&self, topo: &G) -> std::result::Result<(), String> {
        let sizes = self.component_sizes();
        if sizes.len() as u64 != self.num_clusters {
            return Err(format!("{} components found, {} recorded", sizes.len(), self.num_clusters));
        }
        if sizes[0] != self.largest_cluster() {
            return Err(format!("largest cluster {} recorded {}", sizes[0], self.largest_cluster()));
        }
        let recount = self.recount_cross_edges(topo);
        if recount != self.cross_edges {
            return Err(format!("{recount} crossing edges found, {} recorded", self.cross_edges));
        }
        for v in 0..topo.vertex_count() as Vertex {
            let members = self.members(v);
            if members.len() as u64 != self.cluster_size_of(v) {
                return Err(format!("member list of {v} has {} entries", members.len()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Hypercube;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn edge(a: Vertex, b: Vertex) -> Edge {
        Edge::new(a, b).unwrap()
    }

    #[test]
    fn open_and_repeat() {
        let q = Hypercube::new(3).unwrap();
        let mut c = ClusterState::singletons(&q);
        assert!(!c.same_cluster(0, 1));
        assert!(c.open_edge(&q, edge(0, 1)));
        assert_eq!(c.num_clusters(), 7);
        assert!(c.same_cluster(0, 1));
        assert!(!c.open_edge(&q, edge(0, 1)));
        assert_eq!(c.num_clusters(), 7);
    }

    #[test]
    fn transitivity() {
        let q = Hypercube::new(3).unwrap();
        let mut c = ClusterState::singletons(&q);
        c.open_edge(&q, edge(0, 1));
        c.open_edge(&q, edge(1, 3));
        assert!(c.same_cluster(0, 3));
        assert_eq!(c.members(3).len(), 3);
    }

    #[test]
    fn square_on_q2() {
        let q = Hypercube::new(2).unwrap();
        let mut c = ClusterState::singletons(&q);
        let merged: Vec<bool> =
            [edge(0, 1), edge(1, 3), edge(3, 2), edge(2, 0)].into_iter().map(|e| c.open_edge(&q, e)).collect();
        assert_eq!(merged, vec![true, true, true, false]);
        assert_eq!(c.num_clusters(), 1);
        assert_eq!(c.merge_hazard(), 0.0);
    }

    #[test]
    fn hazard_examples() {
        let q = Hypercube::new(2).unwrap();
        let mut c = ClusterState::singletons(&q);
        assert_eq!(c.merge_hazard(), 1.0);
        c.open_edge(&q, edge(0, 1));
        // Of {0,1},{0,2},{1,3},{2,3} only {0,1} is internal to the partition {0,1},{2},{3}.
        assert_eq!(c.cross_edge_count(), 3);
        assert_eq!(c.merge_hazard(), 0.75);
    }

    #[test]
    fn high_degree_core_examples() {
        let q2 = Hypercube::new(2).unwrap();
        let mut c = ClusterState::singletons(&q2);
        c.open_edge(&q2, edge(0, 1));
        assert_eq!(c.high_degree_core(&q2, 2, 0.5), 4);

        let q3 = Hypercube::new(3).unwrap();
        let fresh = ClusterState::singletons(&q3);
        assert_eq!(fresh.high_degree_core(&q3, 3, 0.5), 0);

        let mut full = ClusterState::singletons(&q3);
        for e in q3.edges() {
            full.open_edge(&q3, e);
        }
        assert_eq!(full.num_clusters(), 1);
        assert_eq!(full.high_degree_core(&q3, 3, 1.0), 8);
        assert_eq!(full.merge_hazard(), 0.0);
    }

    #[test]
    fn hazard_matches_one_step_continuations() {
        let q = Hypercube::new(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut c = ClusterState::singletons(&q);
        for _ in 0..150 {
            let e = q.sample_edge(&mut rng);
            c.open_edge(&q, e);
        }
        let p = c.merge_hazard();
        let trials = 40_000;
        let mut hits = 0;
        for _ in 0..trials {
            let e = q.sample_edge(&mut rng);
            if !c.same_cluster(e.lo(), e.hi()) {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() <= 3.0 * se, "freq {freq} p {p}");
    }

    proptest! {
        #[test]
        fn incremental_state_matches_full_scan(n in 2u32..=6, seed in any::<u64>(), steps in 0usize..200) {
            let q = Hypercube::new(n).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = ClusterState::singletons(&q);
            let mut merges = 0u64;
            let mut hazard = c.cross_edge_count();
            for _ in 0..steps {
                let e = q.sample_edge(&mut rng);
                let before = c.num_clusters();
                if c.open_edge(&q, e) {
                    merges += 1;
                    prop_assert_eq!(c.num_clusters() + 1, before);
                }
                prop_assert!(c.cross_edge_count() <= hazard);
                hazard = c.cross_edge_count();
            }
            prop_assert!(merges < q.vertices() as u64);
            prop_assert!(c.check_invariants(&q).is_ok(), "{:?}", c.check_invariants(&q));
        }
    }
}
