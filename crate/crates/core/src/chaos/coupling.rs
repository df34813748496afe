//! Pathwise coupling of the unbiased `N`-agent system with `k` independent
//! copies of the limit process.
//!
//! One master clock of rate `lambda N` drives both. At each ring a uniform
//! `U` picks the giver among the rich agents if `U < r` (rich fraction of
//! the `N`-agent system) and among the broke ones otherwise, and the
//! receiver `j` is uniform. The same `U` decides whether a limit copy
//! receives: `Y = 1[U < r_bar(t)]`, with `r_bar = 1 - p_0(t)` read off the
//! mean-field solution.
//!
//! Limit copies `a < k` only listen to rings that pair them with an
//! untagged agent; the pairings among tagged agents are replaced by
//! independent clocks of rate `lambda / N` so that the copies stay
//! independent.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::abm::stream_rng;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::meanfield::{default_n_max, integrate, Generator, Observer, OdeConfig};
use crate::types::{dirac_pmf, Model, ModelParams, WealthVector};

/// `x = 1[u < p]`, `y = 1[u < q]`: Bernoulli marginals that disagree with
/// probability `|p - q|`.
pub fn bernoulli_couple(p: f64, q: f64, u: f64) -> (bool, bool) {
    (u < p, u < q)
}

/// Upper bound on `E|S_i(t) - S_bar_i(t)|` for `k` tagged agents:
/// `C(t) / sqrt(N) (e^{lambda t} - 1) / lambda + 4 lambda (k - 1) t / N`
/// with `C(t) = sqrt(1/4 + 4 lambda t) + 2 lambda / sqrt(N)`.
pub fn theorem_bound(lambda: f64, n_agents: usize, k: usize, t: f64) -> f64 {
    let n = n_agents as f64;
    let c = (0.25 + 4.0 * lambda * t).sqrt() + 2.0 * lambda / n.sqrt();
    c / n.sqrt() * (lambda * t).exp_m1() / lambda + 4.0 * lambda * (k as f64 - 1.0) * t / n
}

/// Fraction of non-broke agents in the limit law, tabulated on a uniform
/// grid and interpolated linearly.
#[derive(Debug, Clone)]
pub struct RichFraction {
    dt: f64,
    values: Vec<f64>,
}

impl RichFraction {
    pub fn from_ode(lambda: f64, mu: u64, t_end: f64, dt: f64) -> Result<Self> {
        let n_max = default_n_max(mu as f64);
        let g = Generator::new(Model::Unbiased, lambda, mu as f64);
        let mut cfg = OdeConfig::new(dt, t_end, n_max).every(dt);
        cfg.keep_pmfs = false;
        let obs = [Observer::new("r_bar", |_, p| 1.0 - p[0])];
        let rec = integrate(&g, &dirac_pmf(mu as usize, n_max)?, &cfg, &obs)?;
        let values = rec.series("r_bar").expect("observer column");
        Ok(Self { dt, values })
    }

    pub fn at(&self, t: f64) -> f64 {
        let x = (t / self.dt).max(0.0);
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().expect("non-empty table");
        }
        let w = x - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}

/// Rich and broke agents, each in a swap-remove list.
struct Classes {
    members: [Vec<usize>; 2],
    slot: Vec<usize>,
}

impl Classes {
    fn new(state: &[u64]) -> Self {
        let mut members = [Vec::new(), Vec::new()];
        let slot = state
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let c = (s > 0) as usize;
                members[c].push(i);
                members[c].len() - 1
            })
            .collect();
        Self { members, slot }
    }

    fn rich(&self) -> usize {
        self.members[1].len()
    }

    fn moved(&mut self, i: usize, to: usize) {
        let from = 1 - to;
        let k = self.slot[i];
        let last = self.members[from].pop().expect("member present");
        if last != i {
            self.members[from][k] = last;
            self.slot[last] = k;
        }
        self.slot[i] = self.members[to].len();
        self.members[to].push(i);
    }
}

/// One coupled realization.
#[derive(Debug, Clone)]
pub struct CoupledSample {
    /// `(1/k) sum_{a<k} |S_a - S_bar_a|` at each requested time.
    pub mean_abs_diff: Vec<f64>,
    /// The `N`-agent state at the final requested time.
    pub final_state: WealthVector,
}

/// Simulates one coupled realization on random stream `stream`. `times`
/// must be sorted and non-negative.
pub fn coupled_unbiased_replica(
    params: &ModelParams,
    k: usize,
    times: &[f64],
    r_bar: &RichFraction,
    stream: u64,
) -> Result<CoupledSample> {
    let n = params.n_agents;
    if k == 0 || k > n {
        return Err(Error::InvalidParam(format!("k = {k} outside 1..={n}")));
    }
    if times.windows(2).any(|w| w[0] > w[1]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParam("snapshot times must be sorted and >= 0".into()));
    }
    let lambda = params.lambda;
    let mut rng = stream_rng(params.seed, stream);
    let mut s = vec![params.mu; n];
    let mut s_bar = vec![params.mu; k];
    let mut classes = Classes::new(&s);

    let master = lambda * n as f64;
    let extra_each = lambda * k as f64 / n as f64;
    let total = master + 2.0 * k as f64 * extra_each;

    let mut out = Vec::with_capacity(times.len());
    let mut next = 0;
    let mut t = 0.0;
    let mut final_state = None;
    loop {
        let e: f64 = Exp1.sample(&mut rng);
        let t_next = t + e / total;
        while next < times.len() && times[next] < t_next {
            let d: u64 = (0..k).map(|a| s[a].abs_diff(s_bar[a])).sum();
            out.push(d as f64 / k as f64);
            next += 1;
            if next == times.len() {
                final_state = Some(WealthVector::new(s.clone()));
            }
        }
        if next == times.len() {
            break;
        }
        t = t_next;
        let v = rng.random::<f64>() * total;
        if v < master {
            let u = rng.random::<f64>();
            let rich = classes.rich();
            let class = (u * (n as f64) < rich as f64) as usize;
            let pool = &classes.members[class];
            let i = pool[rng.random_range(0..pool.len())];
            let j = rng.random_range(0..n);
            let (_, y) = bernoulli_couple(rich as f64 / n as f64, r_bar.at(t), u);
            if i != j && s[i] > 0 {
                s[i] -= 1;
                s[j] += 1;
                if s[i] == 0 {
                    classes.moved(i, 0);
                }
                if s[j] == 1 {
                    classes.moved(j, 1);
                }
            }
            if j < k && i >= k && y {
                s_bar[j] += 1;
            }
            if i < k && j >= k && s_bar[i] > 0 {
                s_bar[i] -= 1;
            }
        } else {
            let slot = (((v - master) / extra_each) as usize).min(2 * k - 1);
            let a = slot / 2;
            if slot.is_multiple_of(2) {
                s_bar[a] = s_bar[a].saturating_sub(1);
            } else if rng.random::<f64>() < r_bar.at(t) {
                s_bar[a] += 1;
            }
        }
    }
    Ok(CoupledSample { mean_abs_diff: out, final_state: final_state.unwrap_or_else(|| WealthVector::new(s)) })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingTrace {
    pub params: ModelParams,
    pub k: usize,
    pub replicas: usize,
    pub t: Vec<f64>,
    pub mean_abs_diff: Vec<f64>,
    pub std_err: Vec<f64>,
    pub bound: Vec<f64>,
}

impl CouplingTrace {
    /// Measured mean never exceeds the bound.
    pub fn within_bound(&self) -> bool {
        self.mean_abs_diff.iter().zip(&self.bound).all(|(m, b)| m <= b)
    }
}

/// Averages [`coupled_unbiased_replica`] over `replicas` streams and
/// evaluates [`theorem_bound`] at the same times.
pub fn coupled_unbiased_run(
    params: ModelParams,
    k: usize,
    times: &[f64],
    replicas: usize,
    ode_dt: f64,
    exec: Exec,
) -> Result<CouplingTrace> {
    params.validate()?;
    if params.model != Model::Unbiased {
        return Err(Error::InvalidParam("the pathwise coupling is built for the unbiased model".into()));
    }
    if replicas < 2 {
        return Err(Error::InvalidParam("need at least 2 replicas".into()));
    }
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let r_bar = RichFraction::from_ode(params.lambda, params.mu, t_end, ode_dt)?;
    let samples = exec
        .map_indexed(replicas, |r| coupled_unbiased_replica(&params, k, times, &r_bar, r as u64))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let m = replicas as f64;
    let mut mean = Vec::with_capacity(times.len());
    let mut se = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        let mu = samples.iter().map(|s| s.mean_abs_diff[i]).sum::<f64>() / m;
        let var = samples.iter().map(|s| (s.mean_abs_diff[i] - mu).powi(2)).sum::<f64>() / (m - 1.0);
        mean.push(mu);
        se.push((var / m).sqrt());
    }
    let bound = times.iter().map(|&t| theorem_bound(params.lambda, params.n_agents, k, t)).collect();
    Ok(CouplingTrace { params, k, replicas, t: times.to_vec(), mean_abs_diff: mean, std_err: se, bound })
}
