//! Cycle decomposition of the composed permutation `σ_t = τ_{e_t} ∘ … ∘ τ_{e_1}`.
//!
//! Each cycle is stored as a sequence in cyclic order: the successor of a vertex is
//! the next element, and the last element wraps to the first. Sequences live in
//! implicit treaps (position-keyed, heap-ordered by a fixed per-vertex priority)
//! with parent pointers, so a cycle is identified by its tree root and both a
//! split and a merge are a handful of `O(log N)` treap splits and concatenations.
//!
//! For a transposition `{x, y}` the new permutation is `τ ∘ σ`, i.e. the two
//! predecessors of `x` and `y` swap their successors:
//!
//! * same cycle, sequence `[A, x…, y…]`: the pieces are `[x…]` and `[y…, A]`;
//! * different cycles: rotate each to start at its endpoint and concatenate.

use crate::error::{Error, Result};
use crate::graph::{Edge, Vertex};
use crate::size_index::SizeIndex;

/// Identifies a cycle at a fixed time. Ids change as cycles split and merge.
pub type CycleId = u32;

const NIL: u32 = u32::MAX;

/// Effect of one transposition on the cycle decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleChange {
    /// One cycle broke into two; sizes are reported smaller first.
    Split { smaller: u32, larger: u32 },
    /// Two cycles joined into one of the given size.
    Merge { size: u32 },
}

impl CycleChange {
    pub fn is_split(self) -> bool {
        matches!(self, CycleChange::Split { .. })
    }

    pub fn split_min_size(self) -> Option<u32> {
        match self {
            CycleChange::Split { smaller, .. } => Some(smaller),
            CycleChange::Merge { .. } => None,
        }
    }

    /// Whether a split produced at least one cycle of length `≤ k`.
    pub fn is_short_split(self, k: u64) -> Result<bool> {
        match self {
            CycleChange::Split { smaller, .. } => Ok(u64::from(smaller) <= k),
            CycleChange::Merge { .. } => Err(Error::Contract("short-split test applied to a merge")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    left: u32,
    right: u32,
    parent: u32,
    size: u32,
    priority: u32,
}

fn priority_of(v: u32) -> u32 {
    // SplitMix64 finalizer; fixed so runs stay reproducible.
    let mut z = u64::from(v).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ((z ^ (z >> 31)) >> 32) as u32
}

#[derive(Clone, Debug)]
pub struct CycleState {
    nodes: Vec<Node>,
    sizes: SizeIndex,
}

impl CycleState {
    /// The identity permutation on `vertex_count` vertices.
    pub fn identity(vertex_count: usize) -> Self {
        assert!(vertex_count >= 1, "a permutation needs at least one vertex");
        assert!(vertex_count < NIL as usize);
        let nodes = (0..vertex_count as u32)
            .map(|v| Node { left: NIL, right: NIL, parent: NIL, size: 1, priority: priority_of(v) })
            .collect();
        CycleState { nodes, sizes: SizeIndex::with_singletons(vertex_count, vertex_count as u64) }
    }

    pub fn vertex_count(&self) -> usize {
        self.nodes.len()
    }

    /// `N_t`.
    pub fn num_cycles(&self) -> u64 {
        self.sizes.parts()
    }

    fn size(&self, t: u32) -> u32 {
        if t == NIL {
            0
        } else {
            self.nodes[t as usize].size
        }
    }

    fn root(&self, mut v: u32) -> u32 {
        loop {
            let p = self.nodes[v as usize].parent;
            if p == NIL {
                return v;
            }
            v = p;
        }
    }

    /// Position of `v` within its cycle's sequence.
    fn index(&self, v: u32) -> u32 {
        let mut idx = self.size(self.nodes[v as usize].left);
        let mut cur = v;
        loop {
            let p = self.nodes[cur as usize].parent;
            if p == NIL {
                return idx;
            }
            if self.nodes[p as usize].right == cur {
                idx += self.size(self.nodes[p as usize].left) + 1;
            }
            cur = p;
        }
    }

    fn leftmost(&self, mut t: u32) -> u32 {
        while self.nodes[t as usize].left != NIL {
            t = self.nodes[t as usize].left;
        }
        t
    }

    fn rightmost(&self, mut t: u32) -> u32 {
        while self.nodes[t as usize].right != NIL {
            t = self.nodes[t as usize].right;
        }
        t
    }

    fn set_left(&mut self, t: u32, child: u32) {
        self.nodes[t as usize].left = child;
        if child != NIL {
            self.nodes[child as usize].parent = t;
        }
    }

    fn set_right(&mut self, t: u32, child: u32) {
        self.nodes[t as usize].right = child;
        if child != NIL {
            self.nodes[child as usize].parent = t;
        }
    }

    fn pull(&mut self, t: u32) {
        let n = self.nodes[t as usize];
        self.nodes[t as usize].size = 1 + self.size(n.left) + self.size(n.right);
    }

    /// Splits the tree rooted at `t` into its first `k` elements and the rest.
    /// Both returned roots have `parent == NIL`.
    fn split(&mut self, t: u32, k: u32) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        let left = self.nodes[t as usize].left;
        let left_size = self.size(left);
        let (a, b) = if k <= left_size {
            let (a, b) = self.split(left, k);
            self.set_left(t, b);
            self.pull(t);
            (a, t)
        } else {
            let right = self.nodes[t as usize].right;
            let (a, b) = self.split(right, k - left_size - 1);
            self.set_right(t, a);
            self.pull(t);
            (t, b)
        };
        if a != NIL {
            self.nodes[a as usize].parent = NIL;
        }
        if b != NIL {
            self.nodes[b as usize].parent = NIL;
        }
        (a, b)
    }

    /// Concatenates two sequences; returns the new root with `parent == NIL`.
    fn concat(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        let root = if self.nodes[a as usize].priority >= self.nodes[b as usize].priority {
            let right = self.nodes[a as usize].right;
            if right != NIL {
                self.nodes[right as usize].parent = NIL;
            }
            let merged = self.concat(right, b);
            self.set_right(a, merged);
            self.pull(a);
            a
        } else {
            let left = self.nodes[b as usize].left;
            if left != NIL {
                self.nodes[left as usize].parent = NIL;
            }
            let merged = self.concat(a, left);
            self.set_left(b, merged);
            self.pull(b);
            b
        };
        self.nodes[root as usize].parent = NIL;
        root
    }

    /// The cycle rooted at `root`, rotated so that it starts at `v`.
    fn rotate_to(&mut self, root: u32, v: u32) -> u32 {
        let i = self.index(v);
        let (head, tail) = self.split(root, i);
        self.concat(tail, head)
    }

    /// `σ(v)`.
    pub fn successor(&self, v: Vertex) -> Vertex {
        let node = self.nodes[v as usize];
        if node.right != NIL {
            return self.leftmost(node.right);
        }
        let mut cur = v;
        loop {
            let p = self.nodes[cur as usize].parent;
            if p == NIL {
                // `v` is last in its sequence: wrap around.
                return self.leftmost(cur);
            }
            if self.nodes[p as usize].left == cur {
                return p;
            }
            cur = p;
        }
    }

    /// `σ⁻¹(v)`.
    pub fn predecessor(&self, v: Vertex) -> Vertex {
        let node = self.nodes[v as usize];
        if node.left != NIL {
            return self.rightmost(node.left);
        }
        let mut cur = v;
        loop {
            let p = self.nodes[cur as usize].parent;
            if p == NIL {
                return self.rightmost(cur);
            }
            if self.nodes[p as usize].right == cur {
                return p;
            }
            cur = p;
        }
    }

    pub fn cycle_of(&self, v: Vertex) -> CycleId {
        self.root(v)
    }

    pub fn cycle_len_of(&self, v: Vertex) -> u32 {
        self.nodes[self.root(v) as usize].size
    }

    pub fn same_cycle(&self, x: Vertex, y: Vertex) -> bool {
        self.root(x) == self.root(y)
    }

    pub fn largest_cycle(&self) -> u64 {
        self.sizes.largest() as u64
    }

    /// The `k` largest cycle lengths in descending order (fewer if there are fewer cycles).
    pub fn k_largest_cycles(&self, k: usize) -> Vec<u64> {
        self.sizes.k_largest(k).into_iter().map(|s| s as u64).collect()
    }

    /// `|V_t(ℓ)|`: vertices on cycles strictly longer than `ell`.
    pub fn vertices_in_long_cycles(&self, ell: u64) -> u64 {
        self.sizes.mass_above(ell)
    }

    /// Cycle-length histogram as `(length, multiplicity)`, longest first.
    pub fn histogram(&self) -> Vec<(u32, u32)> {
        let mut by_len = std::collections::BTreeMap::<u32, u32>::new();
        for node in self.nodes.iter().filter(|n| n.parent == NIL) {
            *by_len.entry(node.size).or_default() += 1;
        }
        by_len.into_iter().rev().collect()
    }

    /// Vertex lists of every cycle in cyclic order.
    pub fn cycles(&self) -> Vec<Vec<Vertex>> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for root in (0..self.nodes.len() as u32).filter(|&v| self.nodes[v as usize].parent == NIL) {
            let mut seq = Vec::with_capacity(self.nodes[root as usize].size as usize);
            let mut cur = root;
            while cur != NIL || !stack.is_empty() {
                while cur != NIL {
                    stack.push(cur);
                    cur = self.nodes[cur as usize].left;
                }
                let v = stack.pop().expect("non-empty");
                seq.push(v);
                cur = self.nodes[v as usize].right;
            }
            out.push(seq);
        }
        out
    }

    /// Replaces `σ` by `τ_e ∘ σ` and reports whether a cycle split or two merged.
    pub fn apply_transposition(&mut self, e: Edge) -> CycleChange {
        let (x, y) = e.endpoints();
        let (rx, ry) = (self.root(x), self.root(y));
        if rx == ry {
            let total = self.nodes[rx as usize].size;
            let (ix, iy) = (self.index(x), self.index(y));
            let (first, second) = if ix < iy { (ix, iy) } else { (iy, ix) };
            let (front, back) = self.split(rx, second);
            let (head, middle) = self.split(front, first);
            // `middle` starts at one endpoint and runs up to the other one.
            let piece = self.nodes[middle as usize].size;
            self.concat(back, head);
            let rest = total - piece;
            self.sizes.remove(total as usize);
            self.sizes.insert(piece as usize);
            self.sizes.insert(rest as usize);
            CycleChange::Split { smaller: piece.min(rest), larger: piece.max(rest) }
        } else {
            let (sx, sy) = (self.nodes[rx as usize].size, self.nodes[ry as usize].size);
            let from_x = self.rotate_to(rx, x);
            let from_y = self.rotate_to(ry, y);
            self.concat(from_x, from_y);
            self.sizes.remove(sx as usize);
            self.sizes.remove(sy as usize);
            self.sizes.insert((sx + sy) as usize);
            CycleChange::Merge { size: sx + sy }
        }
    }

    /// Full-scan consistency check: tree links and sizes, heap order, successor a
    /// bijection with `predecessor` its inverse, sizes summing to `N`.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.vertex_count();
        for (v, node) in self.nodes.iter().enumerate() {
            for child in [node.left, node.right] {
                if child != NIL {
                    if self.nodes[child as usize].parent != v as u32 {
                        return Err(format!("child {child} of {v} has the wrong parent"));
                    }
                    if self.nodes[child as usize].priority > node.priority {
                        return Err(format!("heap order broken below {v}"));
                    }
                }
            }
            if node.size != 1 + self.size(node.left) + self.size(node.right) {
                return Err(format!("subtree size of {v} is stale"));
            }
        }
        let cycles = self.cycles();
        let total: usize = cycles.iter().map(Vec::len).sum();
        if total != n {
            return Err(format!("cycles cover {total} vertices, expected {n}"));
        }
        if cycles.len() as u64 != self.num_cycles() {
            return Err(format!("num_cycles {} but {} cycles found", self.num_cycles(), cycles.len()));
        }
        let mut hit = vec![false; n];
        for cycle in &cycles {
            for (i, &v) in cycle.iter().enumerate() {
                let next = cycle[(i + 1) % cycle.len()];
                if self.successor(v) != next || self.predecessor(next) != v {
                    return Err(format!("successor of {v} disagrees with its cycle order"));
                }
                if std::mem::replace(&mut hit[v as usize], true) {
                    return Err(format!("vertex {v} appears twice"));
                }
            }
        }
        let mut sizes: Vec<u64> = cycles.iter().map(|c| c.len() as u64).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        if self.k_largest_cycles(sizes.len()) != sizes {
            return Err("size index disagrees with the cycles".into());
        }
        Ok(())
    }
}
