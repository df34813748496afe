use approx::assert_relative_eq;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use kinexch::abm::Simulation;
use kinexch::analysis::{entropy, gini_samples, h0_distance, kl_divergence, unbiased_entropy_dissipation};
use kinexch::chaos::{coupled_unbiased_replica, empirical_vs_ode, limit_law, r_operator, RichFraction};
use kinexch::exec::Exec;
use kinexch::meanfield::{
    geometric_equilibrium, integrate, poisson_values, poor_eigenpairs, q_rich, q_unbias, Generator, Observer,
    OdeConfig,
};
use kinexch::{Model, ModelParams, Pmf};

fn normalized(w: Vec<f64>, n_max: usize) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.into_iter().map(|x| x / s).collect();
    p.resize(n_max + 1, 0.0);
    p
}

/// Strictly positive on all of `0..=n_max`.
fn full_pmf(n_max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n_max + 1).prop_map(move |w| normalized(w, n_max))
}

/// Strictly positive with a geometric tail, so almost no mass sits at `n_max`.
fn decaying_pmf(n_max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n_max + 1).prop_map(move |w| {
        normalized(w.iter().enumerate().map(|(n, x)| x * 0.5f64.powi(n as i32)).collect(), n_max)
    })
}

fn pmf_strategy(max_support: usize, n_max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 2..=max_support).prop_map(move |w| normalized(w, n_max))
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn mean(p: &[f64]) -> f64 {
    p.iter().enumerate().map(|(n, x)| n as f64 * x).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn entropy_never_increases_along_unbiased_flow(p in pmf_strategy(20, 300)) {
        let g = Generator::new(Model::Unbiased, 1.0, mean(&p));
        let cfg = OdeConfig::new(0.01, 5.0, 300).every(0.01);
        let rec = integrate(&g, &Pmf::new(p).unwrap(), &cfg, &[Observer::new("h", |_, q| entropy(q))]).unwrap();
        let h = rec.series("h").unwrap();
        for w in h.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn h0_distance_to_poisson_never_increases(p in pmf_strategy(25, 200)) {
        let mu = mean(&p);
        let pstar = poisson_values(mu, 200);
        let g = Generator::new(Model::PoorBiased, 1.0, mu);
        let cfg = OdeConfig::new(0.005, 3.0, 200).every(0.05);
        let ps = pstar.clone();
        let obs = [Observer::new("d", move |_, q| h0_distance(q, &ps, &ps).unwrap())];
        let rec = integrate(&g, &Pmf::new(p).unwrap(), &cfg, &obs).unwrap();
        let d = rec.series("d").unwrap();
        for w in d.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-14, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn entropy_dissipation_identity(p in decaying_pmf(80)) {
        let direct: f64 = q_unbias(&p).iter().zip(&p).map(|(q, x)| q * x.ln()).sum();
        let via_kl = unbiased_entropy_dissipation(&p);
        prop_assert!((direct - via_kl).abs() <= 1e-9 * direct.abs().max(1.0), "{direct} vs {via_kl}");
    }

    #[test]
    fn r_operator_and_rich_generator_are_l1_bounded(
        p in pmf_strategy(40, 80),
        q in pmf_strategy(40, 80),
    ) {
        prop_assert!(l1(&r_operator(&p)) <= 4.0 * l1(&p) + 1e-12);
        let d: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a - b).collect();
        let dq: Vec<f64> = q_rich(&p).iter().zip(q_rich(&q)).map(|(a, b)| a - b).collect();
        prop_assert!(l1(&dq) <= 6.0 * l1(&d) + 1e-12, "{} > 6 * {}", l1(&dq), l1(&d));
    }

    #[test]
    fn geometric_law_minimizes_entropy_at_fixed_mean(w in prop::collection::vec(0.01f64..1.0, 21)) {
        let mut p = normalized(w, 20);
        let m = mean(&p);
        // mix with an endpoint to pin the mean at 5
        let (theta, end) = if m > 5.0 { (5.0 / m, 0) } else { (15.0 / (20.0 - m), 20) };
        p.iter_mut().for_each(|x| *x *= theta);
        p[end] += 1.0 - theta;
        assert_relative_eq!(mean(&p), 5.0, epsilon = 1e-12);
        let geo = geometric_equilibrium(5.0, 1000).unwrap();
        prop_assert!(entropy(&geo) < entropy(&p));
    }

    #[test]
    fn kl_is_nonnegative_and_vanishes_on_the_diagonal(p in full_pmf(29), q in full_pmf(29)) {
        let k = kl_divergence(&p, &q);
        prop_assert!(!k.support_violation);
        prop_assert!(k.value >= -1e-15);
        prop_assert!(kl_divergence(&p, &p).value.abs() < 1e-15);
    }
}

#[test]
fn spectrum_kernel_is_poisson() {
    let mu = 5.0;
    let sp = poor_eigenpairs(mu, 300, 3).unwrap();
    assert!(sp.values[0].abs() < 1e-9);
    let pstar = poisson_values(mu, 300);
    for (a, b) in sp.vectors[0].iter().zip(&pstar) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

/// Welch two-sample t statistic and two-sided p-value.
fn welch(a: &[f64], b: &[f64]) -> f64 {
    let stats = |v: &[f64]| {
        let m = v.len() as f64;
        let mu = v.iter().sum::<f64>() / m;
        (mu, v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (m - 1.0), m)
    };
    let (ma, va, na) = stats(a);
    let (mb, vb, nb) = stats(b);
    let se2 = va / na + vb / nb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2.powi(2) / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).unwrap();
    2.0 * (1.0 - dist.cdf(t.abs()))
}

#[test]
fn coupled_system_keeps_the_unbiased_law() {
    let params = ModelParams::new(Model::Unbiased, 1.0, 100, 3, 11).unwrap();
    let t = 3.0;
    let r_bar = RichFraction::from_ode(1.0, 3, t, 1e-3).unwrap();
    let replicas = 200;
    let coupled: Vec<f64> = (0..replicas)
        .map(|r| {
            let s = coupled_unbiased_replica(&params, 5, &[t], &r_bar, r).unwrap();
            gini_samples(&s.final_state).unwrap()
        })
        .collect();
    let plain_params = ModelParams { seed: 12, ..params };
    let plain: Vec<f64> = (0..replicas)
        .map(|r| {
            let mut sim = Simulation::with_stream(plain_params, r).unwrap();
            sim.advance_to(t).unwrap();
            gini_samples(sim.state()).unwrap()
        })
        .collect();
    let p = welch(&coupled, &plain);
    assert!(p > 0.01, "Welch p-value {p}");
}

#[test]
fn empirical_error_shrinks_like_inverse_root_n() {
    let base = ModelParams::new(Model::Unbiased, 1.0, 100, 5, 3).unwrap();
    let reference = limit_law(&base, 1.0, 1e-3).unwrap();
    let small = empirical_vs_ode(base, 1.0, 30, &reference, Exec::Parallel).unwrap();
    let large =
        empirical_vs_ode(ModelParams { n_agents: 10_000, ..base }, 1.0, 30, &reference, Exec::Parallel)
            .unwrap();
    let ratio = small.mean / large.mean;
    assert!((5.0..=20.0).contains(&ratio), "ratio {ratio}");
}
