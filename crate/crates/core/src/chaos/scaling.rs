use serde::{Deserialize, Serialize};

use crate::abm::Simulation;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::meanfield::{default_n_max, integrate, Generator, OdeConfig};
use crate::types::{dirac_pmf, empirical_pmf, ModelParams, Pmf};

/// Mean l1 distance between the empirical measure and the limit law at one
/// population size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingEntry {
    pub n_agents: usize,
    pub mean: f64,
    pub std_err: f64,
    pub replicas: usize,
    /// Replicas that stopped in an absorbing state before `t`.
    pub absorbed: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingReport {
    pub params: ModelParams,
    pub t: f64,
    pub ode_dt: f64,
    pub entries: Vec<ScalingEntry>,
    /// Least-squares slope of `log error` against `log N`.
    pub slope: f64,
}

impl ScalingReport {
    pub fn n_values(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.n_agents).collect()
    }
}

pub fn l1_distance(p: &[f64], q: &[f64]) -> f64 {
    (0..p.len().max(q.len()))
        .map(|n| (p.get(n).copied().unwrap_or(0.0) - q.get(n).copied().unwrap_or(0.0)).abs())
        .sum()
}

/// Limit law at time `t` started from everyone holding `mu` dollars.
pub fn limit_law(params: &ModelParams, t: f64, dt: f64) -> Result<Pmf> {
    let mu = params.mu as f64;
    let n_max = default_n_max(mu);
    let g = Generator::new(params.model, params.lambda, mu);
    let cfg = OdeConfig::new(dt, t, n_max);
    let rec = integrate(&g, &dirac_pmf(params.mu as usize, n_max)?, &cfg, &[])?;
    rec.last_pmf().cloned().ok_or_else(|| Error::Undefined("limit solver recorded nothing".into()))
}

/// `E |p_emp(t) - p(t)|_1` over `replicas` independent runs with
/// `params.n_agents` agents. Replica `k` uses random stream `k`.
pub fn empirical_vs_ode(
    params: ModelParams,
    t: f64,
    replicas: usize,
    reference: &Pmf,
    exec: Exec,
) -> Result<ScalingEntry> {
    params.validate()?;
    if replicas < 2 {
        return Err(Error::InvalidParam("need at least 2 replicas".into()));
    }
    let runs = exec.map_indexed(replicas, |k| -> Result<(f64, bool)> {
        let mut sim = Simulation::with_stream(params, k as u64)?;
        let absorbed = match sim.advance_to(t) {
            Ok(()) => false,
            Err(Error::Absorbing { .. }) => true,
            Err(e) => return Err(e),
        };
        let state = sim.state();
        let p = empirical_pmf(state, state.max() as usize)?;
        Ok((l1_distance(&p, reference), absorbed))
    });
    let runs: Vec<(f64, bool)> = runs.into_iter().collect::<Result<_>>()?;
    let m = replicas as f64;
    let mean = runs.iter().map(|r| r.0).sum::<f64>() / m;
    let var = runs.iter().map(|r| (r.0 - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(ScalingEntry {
        n_agents: params.n_agents,
        mean,
        std_err: (var / m).sqrt(),
        replicas,
        absorbed: runs.iter().filter(|r| r.1).count(),
    })
}

/// Least-squares slope of `log y` on `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs [`empirical_vs_ode`] for each population size against one shared
/// limit solution. `n_values` must be strictly increasing.
pub fn scaling_study(
    params: ModelParams,
    n_values: &[usize],
    t: f64,
    replicas: usize,
    ode_dt: f64,
    exec: Exec,
) -> Result<ScalingReport> {
    if n_values.len() < 2 || n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam("need >= 2 strictly increasing population sizes".into()));
    }
    let reference = limit_law(&params, t, ode_dt)?;
    let entries = n_values
        .iter()
        .map(|&n| empirical_vs_ode(ModelParams { n_agents: n, ..params }, t, replicas, &reference, exec))
        .collect::<Result<Vec<_>>>()?;
    let slope = if entries.iter().all(|e| e.mean > 0.0) {
        let x: Vec<f64> = entries.iter().map(|e| e.n_agents as f64).collect();
        let y: Vec<f64> = entries.iter().map(|e| e.mean).collect();
        loglog_slope(&x, &y)
    } else {
        f64::NAN
    };
    Ok(ScalingReport { params, t, ode_dt, entries, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Model;

    #[test]
    fn zero_time_error_is_exactly_zero() {
        for model in Model::ALL {
            let p = ModelParams::new(model, 1.0, 50, 5, 1).unwrap();
            let reference = limit_law(&p, 0.0, 1e-3).unwrap();
            let e = empirical_vs_ode(p, 0.0, 4, &reference, Exec::Sequential).unwrap();
            assert_eq!(e.mean, 0.0);
        }
    }

    #[test]
    fn slope_of_exact_power() {
        let x = [1.0, 10.0, 100.0];
        let y = [3.0, 3.0 / 10f64.sqrt(), 0.3];
        assert!((loglog_slope(&x, &y) + 0.5).abs() < 1e-12);
    }
}
