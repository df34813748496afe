//! A quick pass over the invariants that do not need long runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::Check;
use crate::abm::Simulation;
use crate::analysis::{gini_pmf, gini_samples};
use crate::meanfield::{geometric_equilibrium, poisson_equilibrium, poor_spectrum, q_poor, q_rich, q_unbias};
use crate::types::{empirical_pmf, Model};

fn random_pmf(rng: &mut ChaCha8Rng, support: usize, n_max: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..=n_max).map(|n| if n < support { rng.random::<f64>() } else { 0.0 }).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub(super) fn run(cfg: &ExperimentConfig) -> bool {
    let mut checks = Vec::new();
    let mu = cfg.mu;

    for model in Model::ALL {
        let params = match cfg.params(model, 200) {
            Ok(p) => p,
            Err(e) => {
                checks.push(Check::new(format!("{model} conservation"), false, e.to_string()));
                continue;
            }
        };
        let mut sim = Simulation::new(params).expect("valid params");
        let res = sim.run_events(100_000);
        let total = sim.state().total();
        checks.push(Check::new(
            format!("{model} conservation"),
            res.is_ok() && total == params.total_wealth(),
            format!("total {total} after {} events", sim.log().count),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut mass, mut mean) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let support = rng.random_range(2..=150);
        let p = random_pmf(&mut rng, support, 200);
        let pmu = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum::<f64>();
        for q in [q_unbias(&p), q_poor(&p, pmu), q_rich(&p)] {
            mass = mass.max(q.iter().sum::<f64>().abs());
            mean = mean.max(q.iter().enumerate().map(|(n, x)| n as f64 * x).sum::<f64>().abs());
        }
    }
    checks.push(Check::new(
        "generators conserve mass and mean",
        mass < 1e-12 && mean < 1e-10,
        format!("|sum Q| {mass:.2e}, |sum nQ| {mean:.2e}"),
    ));

    let m = mu as f64;
    let geo = geometric_equilibrium(m, 1000).map(|p| sup(&q_unbias(&p)));
    let poi = poisson_equilibrium(m, 1000).map(|p| sup(&q_poor(&p, m)));
    checks.push(match (geo, poi) {
        (Ok(a), Ok(b)) => {
            Check::new("equilibria are stationary", a < 1e-10 && b < 1e-10, format!("{a:.2e}, {b:.2e}"))
        }
        (a, b) => Check::new("equilibria are stationary", false, format!("{a:?} {b:?}")),
    });

    checks.push(match poor_spectrum(m, 400, 5) {
        Ok(v) => {
            let err = v.iter().enumerate().map(|(k, x)| (x - k as f64).abs()).fold(0.0, f64::max);
            Check::new("poor-biased spectrum is 0, 1, 2, 3, 4", err < 1e-6, format!("max error {err:.2e}"))
        }
        Err(e) => Check::new("poor-biased spectrum is 0, 1, 2, 3, 4", false, e.to_string()),
    });

    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..60);
        let w: Vec<u64> = (0..n).map(|_| rng.random_range(0..20)).collect();
        let state = crate::types::WealthVector::new(w);
        if state.total() == 0 {
            continue;
        }
        let a = gini_samples(&state).expect("positive total");
        let b = gini_pmf(&empirical_pmf(&state, state.max() as usize).expect("fits")).expect("positive mean");
        worst = worst.max((a - b).abs());
    }
    checks.push(Check::new(
        "Gini of samples equals Gini of their pmf",
        worst < 1e-12,
        format!("{worst:.2e}"),
    ));

    super::commands::report_checks(&checks)
}
