//! Right-hand sides of the limit master equations on `0..=n_max`.
//!
//! Mass that would flow from `n_max` to `n_max + 1` is dropped from the
//! vector and returned as a leak rate so the integrator can account for it.

use serde::{Deserialize, Serialize};

use crate::types::Model;

/// `lambda * Q_model`, with the conserved mean fixed for the poor-biased case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub model: Model,
    pub lambda: f64,
    /// Conserved mean. Only the poor-biased operator reads it.
    pub mu: f64,
}

impl Generator {
    pub fn new(model: Model, lambda: f64, mu: f64) -> Self {
        Self { model, lambda, mu }
    }

    /// Writes `lambda * Q[p]` into `out` and returns `lambda` times the
    /// outflow rate past `n_max`.
    pub fn apply(&self, p: &[f64], out: &mut [f64]) -> f64 {
        let leak = match self.model {
            Model::Unbiased => unbias_into(p, out),
            Model::PoorBiased => poor_into(p, self.mu, out),
            Model::RichBiased => rich_into(p, out),
        };
        if self.lambda != 1.0 {
            out.iter_mut().for_each(|x| *x *= self.lambda);
        }
        self.lambda * leak
    }
}

/// Three-term birth-death update shared by all models:
/// `out[n] = down[n+1] p[n+1] + up p[n-1] - (down[n] + up[n]) p[n]`,
/// where `down` is the per-state giving rate and `up` the receiving rate.
fn birth_death<D: Fn(usize) -> f64>(p: &[f64], up: f64, down: D, out: &mut [f64]) -> f64 {
    let n_max = p.len() - 1;
    for n in 0..=n_max {
        let from_above = if n < n_max { down(n + 1) * p[n + 1] } else { 0.0 };
        let from_below = if n > 0 { up * p[n - 1] } else { 0.0 };
        out[n] = from_above + from_below - (down(n) + up) * p[n];
    }
    up * p[n_max]
}

fn unbias_into(p: &[f64], out: &mut [f64]) -> f64 {
    let r = 1.0 - p[0];
    birth_death(p, r, |n| if n > 0 { 1.0 } else { 0.0 }, out)
}

fn poor_into(p: &[f64], mu: f64, out: &mut [f64]) -> f64 {
    birth_death(p, mu, |n| n as f64, out)
}

fn rich_into(p: &[f64], out: &mut [f64]) -> f64 {
    let w = harmonic_weight(p);
    birth_death(p, w, |n| if n > 0 { 1.0 / n as f64 } else { 0.0 }, out)
}

/// `sum_{n >= 1} p_n / n`, the rate at which a typical agent receives in
/// the rich-biased dynamics.
pub fn harmonic_weight(p: &[f64]) -> f64 {
    p.iter().enumerate().skip(1).map(|(n, &x)| x / n as f64).sum()
}

/// `Q_unbias[p]`, with `r = 1 - p_0`.
pub fn q_unbias(p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    unbias_into(p, &mut out);
    out
}

/// `Q_poor[p]` for the conserved mean `mu`.
pub fn q_poor(p: &[f64], mu: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    poor_into(p, mu, &mut out);
    out
}

/// `Q_rich[p]`.
pub fn q_rich(p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    rich_into(p, &mut out);
    out
}

/// `Q_poor` written in divergence form, `mu * D^-( p* D^+ (p / p*) )`, with
/// forward difference `D^+ u_n = u_{n+1} - u_n` and backward difference
/// `D^- v_n = v_n - v_{n-1}`. Requires `pstar > 0` wherever it is read.
pub fn fokker_planck_poor(p: &[f64], pstar: &[f64], mu: f64) -> Vec<f64> {
    let n_max = p.len() - 1;
    let u: Vec<f64> = p.iter().zip(pstar).map(|(a, b)| a / b).collect();
    let flux: Vec<f64> = (0..=n_max)
        .map(|n| {
            let next = if n < n_max { pstar[n] * u[n + 1] } else { 0.0 };
            mu * (next - p[n])
        })
        .collect();
    (0..=n_max).map(|n| flux[n] - if n > 0 { flux[n - 1] } else { 0.0 }).collect()
}
