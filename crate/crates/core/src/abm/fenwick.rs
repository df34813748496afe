//! Binary indexed tree over non-negative weights, used to draw an index with
//! probability proportional to its weight in O(log n).

use std::ops::{Add, Sub};

pub trait Weight: Copy + Default + PartialOrd + Add<Output = Self> + Sub<Output = Self> {}

impl Weight for u64 {}
impl Weight for f64 {}

#[derive(Debug, Clone)]
pub struct Fenwick<W> {
    tree: Vec<W>,
    top: usize,
}

impl<W: Weight> Fenwick<W> {
    /// Linear-time build.
    pub fn from_weights(weights: &[W]) -> Self {
        let n = weights.len();
        let mut tree = weights.to_vec();
        for i in 1..=n {
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                let v = tree[i - 1];
                tree[parent - 1] = tree[parent - 1] + v;
            }
        }
        let top = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        Self { tree, top }
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    pub fn increase(&mut self, index: usize, delta: W) {
        let mut i = index + 1;
        while i <= self.tree.len() {
            self.tree[i - 1] = self.tree[i - 1] + delta;
            i += i & i.wrapping_neg();
        }
    }

    pub fn decrease(&mut self, index: usize, delta: W) {
        let mut i = index + 1;
        while i <= self.tree.len() {
            self.tree[i - 1] = self.tree[i - 1] - delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Replaces the weight at `index`, given its previous value.
    pub fn update(&mut self, index: usize, old: W, new: W) {
        if new >= old {
            self.increase(index, new - old);
        } else {
            self.decrease(index, old - new);
        }
    }

    /// Sum of the weights at indices `0..end`.
    pub fn prefix(&self, end: usize) -> W {
        let mut acc = W::default();
        let mut i = end;
        while i > 0 {
            acc = acc + self.tree[i - 1];
            i &= i - 1;
        }
        acc
    }

    pub fn total(&self) -> W {
        self.prefix(self.tree.len())
    }

    /// Smallest index `k` with `prefix(k + 1) > target`, or `len()` if the
    /// target is not below the total.
    pub fn find(&self, target: W) -> usize {
        let mut pos = 0;
        let mut rem = target;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next <= self.tree.len() && self.tree[next - 1] <= rem {
                pos = next;
                rem = rem - self.tree[next - 1];
            }
            step >>= 1;
        }
        pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn find_skips_zero_weights() {
        let f = Fenwick::from_weights(&[0u64, 3, 0, 1, 0]);
        assert_eq!(f.total(), 4);
        assert_eq!(f.find(0), 1);
        assert_eq!(f.find(2), 1);
        assert_eq!(f.find(3), 3);
        assert_eq!(f.find(4), 5);
    }

    proptest! {
        #[test]
        fn prefix_and_find_match_linear_scan(
            weights in prop::collection::vec(0u64..20, 1..80),
            updates in prop::collection::vec((0usize..80, 0u64..20), 0..40),
        ) {
            let mut w = weights.clone();
            let mut f = Fenwick::from_weights(&w);
            for (i, v) in updates {
                let i = i % w.len();
                f.update(i, w[i], v);
                w[i] = v;
            }
            let mut acc = 0;
            for k in 0..=w.len() {
                prop_assert_eq!(f.prefix(k), acc);
                if k < w.len() { acc += w[k]; }
            }
            for target in 0..acc {
                let k = f.find(target);
                let before: u64 = w[..k].iter().sum();
                prop_assert!(before <= target && target < before + w[k]);
            }
        }
    }
}
