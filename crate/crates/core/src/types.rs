//! Domain types shared by the simulator, the mean-field solver and the
//! analyzers.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on negative entries of a [`Pmf`].
pub const PMF_NEG_TOL: f64 = 1e-12;
/// Tolerance on the total mass of a [`Pmf`].
pub const PMF_MASS_TOL: f64 = 1e-9;

/// Which exchange rule selects the giver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Giver uniform among agents with at least one dollar.
    Unbiased,
    /// Giver picked with probability proportional to its wealth.
    PoorBiased,
    /// Giver picked with probability inversely proportional to its wealth.
    RichBiased,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Unbiased, Model::PoorBiased, Model::RichBiased];

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Unbiased => "unbiased",
            Model::PoorBiased => "poor-biased",
            Model::RichBiased => "rich-biased",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Wealth of every agent, in whole dollars.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WealthVector {
    dollars: Vec<u64>,
}

impl WealthVector {
    pub fn new(dollars: Vec<u64>) -> Self {
        Self { dollars }
    }

    /// Every agent starts with `mu` dollars.
    pub fn uniform(n_agents: usize, mu: u64) -> Self {
        Self { dollars: vec![mu; n_agents] }
    }

    pub fn len(&self) -> usize {
        self.dollars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dollars.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.dollars
    }

    pub fn get(&self, i: usize) -> u64 {
        self.dollars[i]
    }

    pub fn total(&self) -> u64 {
        self.dollars.iter().sum()
    }

    pub fn max(&self) -> u64 {
        self.dollars.iter().copied().max().unwrap_or(0)
    }

    /// Average wealth per agent.
    pub fn mean(&self) -> f64 {
        if self.dollars.is_empty() {
            return 0.0;
        }
        self.total() as f64 / self.dollars.len() as f64
    }

    /// Moves one dollar from `from` to `to`. A self-transfer is a no-op.
    ///
    /// Panics if `from` is broke; callers only pick givers with positive rate.
    pub(crate) fn transfer(&mut self, from: usize, to: usize) {
        if from == to {
            return;
        }
        let giver = &mut self.dollars[from];
        *giver = giver.checked_sub(1).expect("giver selected with zero dollars");
        self.dollars[to] += 1;
    }

    /// Count of agents holding each amount, `counts[n] = #{i : S_i = n}`.
    pub fn histogram(&self, n_max: usize) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; n_max + 1];
        for &s in &self.dollars {
            let slot = counts.get_mut(s as usize).ok_or(Error::Truncation { max: self.max(), n_max })?;
            *slot += 1;
        }
        Ok(counts)
    }
}

/// Probability mass function over `0..=n_max` dollars, stored dense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Validates non-negativity (up to `-1e-12`) and unit mass (within `1e-9`).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPmf("empty".into()));
        }
        if let Some((i, &v)) = probs.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -PMF_NEG_TOL) {
            return Err(Error::InvalidPmf(format!("entry {i} is {v:e}")));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > PMF_MASS_TOL {
            return Err(Error::InvalidPmf(format!("total mass {mass} != 1")));
        }
        Ok(Self { probs })
    }

    /// Wraps a vector without validation, for solver states whose mass is
    /// tracked separately.
    pub fn from_vec_unchecked(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    /// Normalizes non-negative weights to unit mass.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidPmf("weights must be non-negative with positive sum".into()));
        }
        Ok(Self { probs: weights.into_iter().map(|w| w / total).collect() })
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs.iter().enumerate().map(|(n, p)| (n as f64 - m).powi(2) * p).sum()
    }

    /// Copy padded with zeros (or cut) to `n_max + 1` entries. Cutting fails
    /// if it would drop positive mass.
    pub fn resized(&self, n_max: usize) -> Result<Pmf> {
        let mut probs = self.probs.clone();
        if n_max + 1 < probs.len() {
            if probs[n_max + 1..].iter().any(|&p| p > 0.0) {
                return Err(Error::InvalidPmf(format!("cannot cut pmf with mass beyond n = {n_max}")));
            }
            probs.truncate(n_max + 1);
        } else {
            probs.resize(n_max + 1, 0.0);
        }
        Ok(Pmf { probs })
    }
}

impl Deref for Pmf {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.probs
    }
}

/// Empirical distribution of a wealth vector: `p[n] = #{i : S_i = n} / N`.
pub fn empirical_pmf(state: &WealthVector, n_max: usize) -> Result<Pmf> {
    if state.is_empty() {
        return Err(Error::InvalidParam("empty wealth vector".into()));
    }
    let counts = state.histogram(n_max)?;
    let n = state.len() as f64;
    Ok(Pmf { probs: counts.into_iter().map(|c| c as f64 / n).collect() })
}

/// Point mass at `m` on `0..=n_max`.
pub fn dirac_pmf(m: usize, n_max: usize) -> Result<Pmf> {
    if m > n_max {
        return Err(Error::Range { index: m, n_max });
    }
    let mut probs = vec![0.0; n_max + 1];
    probs[m] = 1.0;
    Ok(Pmf { probs })
}

/// Model choice plus the physical parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: Model,
    /// Clock scale: one unit of time is about `lambda` give attempts per agent.
    pub lambda: f64,
    pub n_agents: usize,
    /// Mean dollars per agent.
    pub mu: u64,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(model: Model, lambda: f64, n_agents: usize, mu: u64, seed: u64) -> Result<Self> {
        let params = Self { model, lambda, n_agents, mu, seed };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParam(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if self.n_agents < 2 {
            return Err(Error::InvalidParam(format!("n_agents must be >= 2, got {}", self.n_agents)));
        }
        if self.mu < 1 {
            return Err(Error::InvalidParam("mu must be >= 1".into()));
        }
        Ok(())
    }

    /// Total number of dollars in the economy.
    pub fn total_wealth(&self) -> u64 {
        self.n_agents as u64 * self.mu
    }
}

/// Why a stochastic run stopped before its horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Halt {
    pub t: f64,
    pub events: u64,
}

/// Time series of pmfs together with named scalar observations.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    times: Vec<f64>,
    pmfs: Vec<Pmf>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    /// Set when the run hit an absorbing state before its horizon.
    pub halted: Option<Halt>,
}

impl TrajectoryRecord {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, ..Default::default() }
    }

    /// Appends a snapshot. Times must be strictly increasing and `values`
    /// must match the column list.
    pub fn push(&mut self, t: f64, pmf: Pmf, values: Vec<f64>) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidParam(format!("snapshot time {t} not after previous {last}")));
            }
        }
        if values.len() != self.columns.len() {
            return Err(Error::InvalidParam(format!(
                "expected {} observer values, got {}",
                self.columns.len(),
                values.len()
            )));
        }
        self.times.push(t);
        self.pmfs.push(pmf);
        self.rows.push(values);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn pmfs(&self) -> &[Pmf] {
        &self.pmfs
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn last_pmf(&self) -> Option<&Pmf> {
        self.pmfs.last()
    }

    /// All values of one observer, in time order.
    pub fn series(&self, column: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == column)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}
