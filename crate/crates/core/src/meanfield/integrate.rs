use serde::{Deserialize, Serialize};

use super::generator::Generator;
use crate::error::{Error, Result};
use crate::types::{Pmf, TrajectoryRecord};

pub const DEFAULT_MASS_LEAK_TOL: f64 = 1e-8;
/// Entries below this are treated as a broken solution.
pub const NEGATIVE_TOL: f64 = -1e-12;

/// When the integrator stores a snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Every `interval` time units, starting at 0 and including `t_end`.
    Every(f64),
    /// At the given times, each rounded to the nearest step.
    Times(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub n_max: usize,
    pub mass_leak_tol: f64,
    /// Allowed drift of the mean (leaked mass counted at `n_max + 1`),
    /// relative to `max(1, mu)`.
    pub mean_tol: f64,
    pub schedule: Schedule,
    /// Keep the pmf of every snapshot, not just observer values.
    pub keep_pmfs: bool,
}

impl OdeConfig {
    pub fn new(dt: f64, t_end: f64, n_max: usize) -> Self {
        Self {
            dt,
            t_end,
            n_max,
            mass_leak_tol: DEFAULT_MASS_LEAK_TOL,
            mean_tol: 1e-8,
            schedule: Schedule::Every(t_end.max(dt)),
            keep_pmfs: true,
        }
    }

    pub fn every(mut self, interval: f64) -> Self {
        self.schedule = Schedule::Every(interval);
        self
    }

    pub fn at(mut self, times: Vec<f64>) -> Self {
        self.schedule = Schedule::Times(times);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParam(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParam(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParam("n_max must be >= 1".into()));
        }
        if !(self.mass_leak_tol >= 0.0) {
            return Err(Error::InvalidParam("mass_leak_tol must be >= 0".into()));
        }
        if let Schedule::Every(h) = self.schedule {
            if !(h > 0.0) {
                return Err(Error::InvalidParam(format!("snapshot interval must be > 0, got {h}")));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    /// Step indices at which snapshots are taken, sorted and deduplicated.
    fn snapshot_steps(&self) -> Vec<u64> {
        let last = self.steps();
        let mut steps: Vec<u64> = match &self.schedule {
            Schedule::Every(h) => {
                let stride = ((h / self.dt).round() as u64).max(1);
                let mut v: Vec<u64> = (0..=last).step_by(stride as usize).collect();
                v.push(last);
                v
            }
            Schedule::Times(ts) => {
                ts.iter().map(|t| ((t / self.dt).round().max(0.0) as u64).min(last)).collect()
            }
        };
        steps.sort_unstable();
        steps.dedup();
        steps
    }
}

/// A named scalar computed from each snapshot.
pub struct Observer<'a> {
    pub name: String,
    f: Box<dyn Fn(f64, &Pmf) -> f64 + 'a>,
}

impl<'a> Observer<'a> {
    pub fn new(name: impl Into<String>, f: impl Fn(f64, &Pmf) -> f64 + 'a) -> Self {
        Self { name: name.into(), f: Box::new(f) }
    }
}

/// Name of the column holding the accumulated mass lost past `n_max`.
pub const LEAK_COLUMN: &str = "leak";

struct Workspace {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Workspace {
    fn new(len: usize) -> Self {
        Self { k: std::array::from_fn(|_| vec![0.0; len]), tmp: vec![0.0; len] }
    }
}

/// One classical RK4 step. Returns the leaked mass over the step.
fn rk4_step(g: &Generator, p: &mut [f64], dt: f64, ws: &mut Workspace) -> f64 {
    let Workspace { k, tmp } = ws;
    let [k1, k2, k3, k4] = k;
    let l1 = g.apply(p, k1);
    for ((t, x), d) in tmp.iter_mut().zip(p.iter()).zip(k1.iter()) {
        *t = x + 0.5 * dt * d;
    }
    let l2 = g.apply(tmp, k2);
    for ((t, x), d) in tmp.iter_mut().zip(p.iter()).zip(k2.iter()) {
        *t = x + 0.5 * dt * d;
    }
    let l3 = g.apply(tmp, k3);
    for ((t, x), d) in tmp.iter_mut().zip(p.iter()).zip(k3.iter()) {
        *t = x + dt * d;
    }
    let l4 = g.apply(tmp, k4);
    for n in 0..p.len() {
        p[n] += dt / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
    }
    dt / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4)
}

/// Integrates `dp/dt = lambda Q[p]` with fixed-step RK4 from `p0`, padded or
/// cut to `cfg.n_max`.
///
/// After every step the solution is checked: leaked mass must stay below
/// `cfg.mass_leak_tol`, the mean (leaked mass counted at `n_max + 1`) must
/// stay within `cfg.mean_tol` of its start value, and no entry may drop
/// below `-1e-12`. Snapshot times are exact multiples of `dt`.
pub fn integrate(
    generator: &Generator,
    p0: &Pmf,
    cfg: &OdeConfig,
    observers: &[Observer<'_>],
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let p0 = p0.resized(cfg.n_max)?;
    let mean0 = p0.mean();
    let target_mean = match generator.model {
        crate::Model::PoorBiased => {
            if (mean0 - generator.mu).abs() > 1e-9 * generator.mu.max(1.0) {
                return Err(Error::InvalidParam(format!(
                    "initial mean {mean0} differs from generator mu {}",
                    generator.mu
                )));
            }
            generator.mu
        }
        _ => mean0,
    };
    let scale = target_mean.max(1.0);

    let mut columns = vec![LEAK_COLUMN.to_string()];
    columns.extend(observers.iter().map(|o| o.name.clone()));
    let mut record = TrajectoryRecord::new(columns);

    let snaps = cfg.snapshot_steps();
    let mut next_snap = snaps.iter().peekable();
    let mut p = p0.into_vec();
    let mut leak = 0.0;
    let mut ws = Workspace::new(p.len());
    let top = (cfg.n_max + 1) as f64;

    let total_steps = cfg.steps();
    for step in 0..=total_steps {
        let t = step as f64 * cfg.dt;
        if step > 0 {
            leak += rk4_step(generator, &mut p, cfg.dt, &mut ws);
            if leak > cfg.mass_leak_tol {
                return Err(Error::MassLeak { t, leak, n_max: cfg.n_max });
            }
            if let Some((index, &value)) = p.iter().enumerate().find(|(_, v)| !(**v >= NEGATIVE_TOL)) {
                return Err(Error::NegativeProbability { t, index, value });
            }
            let mean: f64 = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum::<f64>();
            let drift = (mean + top * leak - target_mean).abs();
            if drift > cfg.mean_tol * scale {
                return Err(Error::MeanDrift { t, drift });
            }
        }
        if next_snap.peek() == Some(&&step) {
            next_snap.next();
            let pmf = Pmf::from_vec_unchecked(p.clone());
            let mut row = Vec::with_capacity(observers.len() + 1);
            row.push(leak);
            row.extend(observers.iter().map(|o| (o.f)(t, &pmf)));
            let kept = if cfg.keep_pmfs { pmf } else { Pmf::from_vec_unchecked(Vec::new()) };
            record.push(t, kept, row)?;
        }
    }
    Ok(record)
}
