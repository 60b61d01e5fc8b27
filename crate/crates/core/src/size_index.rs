//! Multiset of part sizes in `1..=capacity`, backed by two Fenwick trees (part
//! counts and vertex mass), so order statistics and tail sums are `O(log N)`.

#[derive(Clone, Debug)]
pub(crate) struct SizeIndex {
    counts: Vec<u64>,
    mass: Vec<u64>,
    parts: u64,
    total: u64,
    top_bit: usize,
}

impl SizeIndex {
    pub fn new(capacity: usize) -> Self {
        let top_bit = if capacity == 0 { 0 } else { 1 << (usize::BITS - 1 - capacity.leading_zeros()) };
        SizeIndex {
            counts: vec![0; capacity + 1],
            mass: vec![0; capacity + 1],
            parts: 0,
            total: 0,
            top_bit,
        }
    }

    /// Starts with `parts` parts of size 1 in linear time.
    pub fn with_singletons(capacity: usize, parts: u64) -> Self {
        let mut index = SizeIndex::new(capacity);
        if capacity > 0 && parts > 0 {
            // Build the tree directly: only position 1 is non-zero.
            let mut i = 1;
            while i <= capacity {
                index.counts[i] = parts;
                index.mass[i] = parts;
                i += i & i.wrapping_neg();
            }
        }
        index.parts = parts;
        index.total = parts;
        index
    }

    fn update(&mut self, size: usize, delta_count: i64) {
        debug_assert!(size >= 1 && size < self.counts.len());
        let delta_mass = delta_count * size as i64;
        let mut i = size;
        while i < self.counts.len() {
            self.counts[i] = self.counts[i].wrapping_add_signed(delta_count);
            self.mass[i] = self.mass[i].wrapping_add_signed(delta_mass);
            i += i & i.wrapping_neg();
        }
        self.parts = self.parts.wrapping_add_signed(delta_count);
        self.total = self.total.wrapping_add_signed(delta_mass);
    }

    pub fn insert(&mut self, size: usize) {
        self.update(size, 1);
    }

    pub fn remove(&mut self, size: usize) {
        self.update(size, -1);
    }

    pub fn parts(&self) -> u64 {
        self.parts
    }

    /// `Σ size` over parts with `size ≤ limit`.
    fn mass_up_to(&self, limit: usize) -> u64 {
        let mut i = limit.min(self.counts.len() - 1);
        let mut acc = 0;
        while i > 0 {
            acc += self.mass[i];
            i &= i - 1;
        }
        acc
    }

    /// `Σ size` over parts with `size > limit`.
    pub fn mass_above(&self, limit: u64) -> u64 {
        let limit = usize::try_from(limit).unwrap_or(usize::MAX);
        self.total - self.mass_up_to(limit)
    }

    /// The `rank`-th smallest size, 1-based.
    fn select(&self, rank: u64) -> usize {
        debug_assert!(rank >= 1 && rank <= self.parts);
        let mut pos = 0;
        let mut remaining = rank;
        let mut step = self.top_bit;
        while step > 0 {
            let next = pos + step;
            if next < self.counts.len() && self.counts[next] < remaining {
                pos = next;
                remaining -= self.counts[next];
            }
            step >>= 1;
        }
        pos + 1
    }

    pub fn largest(&self) -> usize {
        if self.parts == 0 {
            0
        } else {
            self.select(self.parts)
        }
    }

    /// Up to `k` largest sizes, descending.
    pub fn k_largest(&self, k: usize) -> Vec<usize> {
        let k = (k as u64).min(self.parts);
        (0..k).map(|j| self.select(self.parts - j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matches_sorted_vector(sizes in proptest::collection::vec(1usize..=40, 0..60), k in 1usize..10, limit in 0u64..45) {
            let mut index = SizeIndex::new(40);
            for &s in &sizes {
                index.insert(s);
            }
            let mut sorted = sizes.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            prop_assert_eq!(index.parts(), sizes.len() as u64);
            prop_assert_eq!(index.largest(), sorted.first().copied().unwrap_or(0));
            prop_assert_eq!(index.k_largest(k), sorted.iter().copied().take(k).collect::<Vec<_>>());
            let above: usize = sizes.iter().filter(|&&s| s as u64 > limit).sum();
            prop_assert_eq!(index.mass_above(limit), above as u64);
            if let Some(&s) = sizes.first() {
                index.remove(s);
                sorted.remove(sorted.iter().position(|&x| x == s).unwrap());
                prop_assert_eq!(index.k_largest(k), sorted.iter().copied().take(k).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn singletons_constructor_matches_inserts() {
        for cap in [1usize, 2, 7, 8, 33] {
            let fast = SizeIndex::with_singletons(cap, cap as u64);
            let mut slow = SizeIndex::new(cap);
            (0..cap).for_each(|_| slow.insert(1));
            assert_eq!(fast.counts, slow.counts);
            assert_eq!(fast.mass, slow.mass);
            assert_eq!(fast.largest(), 1);
        }
    }
}
