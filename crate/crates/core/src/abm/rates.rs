//! Per-agent giving rates and the structures used to sample a giver.
//!
//! After aggregating the `N` receiver clocks of rate `lambda / N`, agent `i`
//! gives at rate
//!
//! * unbiased: `lambda` if `S_i >= 1`,
//! * poor-biased: `lambda * S_i`,
//! * rich-biased: `lambda / S_i` if `S_i >= 1`,
//!
//! and zero otherwise.

use rand::Rng;

use super::fenwick::Fenwick;
use crate::types::{Model, WealthVector};

/// Rich-biased weights are rebuilt from scratch after this many updates.
pub const REBUILD_EVERY: u64 = 1 << 20;

const ABSENT: usize = usize::MAX;

/// Agents with at least one dollar, with O(1) insert, remove and uniform draw.
#[derive(Debug, Clone)]
struct Partition {
    members: Vec<usize>,
    slot: Vec<usize>,
}

impl Partition {
    fn new(state: &WealthVector) -> Self {
        let mut slot = vec![ABSENT; state.len()];
        let mut members = Vec::with_capacity(state.len());
        for (i, &s) in state.as_slice().iter().enumerate() {
            if s > 0 {
                slot[i] = members.len();
                members.push(i);
            }
        }
        Self { members, slot }
    }

    fn insert(&mut self, i: usize) {
        if self.slot[i] == ABSENT {
            self.slot[i] = self.members.len();
            self.members.push(i);
        }
    }

    fn remove(&mut self, i: usize) {
        let k = self.slot[i];
        if k == ABSENT {
            return;
        }
        let last = self.members.pop().expect("non-empty");
        if last != i {
            self.members[k] = last;
            self.slot[last] = k;
        }
        self.slot[i] = ABSENT;
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Unbiased(Partition),
    Poor(Fenwick<u64>),
    Rich(Fenwick<f64>),
}

fn inverse(s: u64) -> f64 {
    if s == 0 {
        0.0
    } else {
        1.0 / s as f64
    }
}

#[derive(Debug, Clone)]
pub struct RateTable {
    model: Model,
    lambda: f64,
    n_agents: usize,
    sampler: Sampler,
    updates: u64,
}

impl RateTable {
    pub fn new(model: Model, lambda: f64, state: &WealthVector) -> Self {
        let sampler = match model {
            Model::Unbiased => Sampler::Unbiased(Partition::new(state)),
            Model::PoorBiased => Sampler::Poor(Fenwick::from_weights(state.as_slice())),
            Model::RichBiased => {
                let w: Vec<f64> = state.as_slice().iter().map(|&s| inverse(s)).collect();
                Sampler::Rich(Fenwick::from_weights(&w))
            }
        };
        Self { model, lambda, n_agents: state.len(), sampler, updates: 0 }
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    /// Giving rate of an agent holding `s` dollars.
    pub fn rate_for(&self, s: u64) -> f64 {
        match self.model {
            Model::Unbiased => {
                if s > 0 {
                    self.lambda
                } else {
                    0.0
                }
            }
            Model::PoorBiased => self.lambda * s as f64,
            Model::RichBiased => self.lambda * inverse(s),
        }
    }

    pub fn rates(&self, state: &WealthVector) -> Vec<f64> {
        state.as_slice().iter().map(|&s| self.rate_for(s)).collect()
    }

    /// Sum of all giving rates, from the incrementally maintained structure.
    pub fn total_rate(&self) -> f64 {
        match &self.sampler {
            Sampler::Unbiased(p) => self.lambda * p.members.len() as f64,
            Sampler::Poor(f) => self.lambda * f.total() as f64,
            Sampler::Rich(f) => self.lambda * f.total(),
        }
    }

    /// Draws a giver with probability `r_i / total_rate`. The caller ensures
    /// `total_rate() > 0`.
    pub fn sample_giver<R: Rng + ?Sized>(&self, state: &WealthVector, rng: &mut R) -> usize {
        match &self.sampler {
            Sampler::Unbiased(p) => p.members[rng.random_range(0..p.members.len())],
            Sampler::Poor(f) => f.find(rng.random_range(0..f.total())),
            Sampler::Rich(f) => {
                let total = f.total();
                loop {
                    let i = f.find(rng.random::<f64>() * total);
                    // round-off can land on a broke agent or past the end
                    if i < self.n_agents && state.get(i) > 0 {
                        return i;
                    }
                }
            }
        }
    }

    /// Refreshes the entries of `giver` and `receiver` after one dollar moved
    /// between them; `state` is the post-transfer state.
    pub fn on_transfer(&mut self, state: &WealthVector, giver: usize, receiver: usize) {
        if giver == receiver {
            return;
        }
        let (sg, sr) = (state.get(giver), state.get(receiver));
        match &mut self.sampler {
            Sampler::Unbiased(p) => {
                if sg == 0 {
                    p.remove(giver);
                }
                p.insert(receiver);
            }
            Sampler::Poor(f) => {
                f.decrease(giver, 1);
                f.increase(receiver, 1);
            }
            Sampler::Rich(f) => {
                f.update(giver, inverse(sg + 1), inverse(sg));
                f.update(receiver, inverse(sr - 1), inverse(sr));
                self.updates += 1;
                if self.updates >= REBUILD_EVERY {
                    self.rebuild(state);
                }
            }
        }
    }

    /// Recomputes every structure from `state`.
    pub fn rebuild(&mut self, state: &WealthVector) {
        *self = RateTable::new(self.model, self.lambda, state);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn giver_frequencies(model: Model, dollars: Vec<u64>, draws: usize) -> Vec<f64> {
        let state = WealthVector::new(dollars);
        let table = RateTable::new(model, 1.0, &state);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = vec![0usize; state.len()];
        for _ in 0..draws {
            counts[table.sample_giver(&state, &mut rng)] += 1;
        }
        counts.into_iter().map(|c| c as f64 / draws as f64).collect()
    }

    #[test]
    fn poor_biased_giver_law() {
        let f = giver_frequencies(Model::PoorBiased, vec![1, 3], 200_000);
        // sd = sqrt(0.75 * 0.25 / 2e5) ~ 1e-3
        assert!((f[1] - 0.75).abs() < 5e-3, "{f:?}");
    }

    #[test]
    fn rich_biased_giver_law() {
        let f = giver_frequencies(Model::RichBiased, vec![1, 4], 200_000);
        assert!((f[0] - 0.8).abs() < 5e-3, "{f:?}");
    }

    #[test]
    fn broke_agents_never_give() {
        for model in Model::ALL {
            let f = giver_frequencies(model, vec![0, 2, 0, 1], 20_000);
            assert_eq!(f[0], 0.0);
            assert_eq!(f[2], 0.0);
        }
    }

    #[test]
    fn total_rates() {
        let s = WealthVector::new(vec![0, 2, 4]);
        assert_eq!(RateTable::new(Model::Unbiased, 2.0, &s).total_rate(), 4.0);
        assert_eq!(RateTable::new(Model::PoorBiased, 2.0, &s).total_rate(), 12.0);
        assert_eq!(RateTable::new(Model::RichBiased, 2.0, &s).total_rate(), 1.5);
        let zero = WealthVector::new(vec![0; 5]);
        assert_eq!(RateTable::new(Model::Unbiased, 1.0, &zero).total_rate(), 0.0);
    }
}
