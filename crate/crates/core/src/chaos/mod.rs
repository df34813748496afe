//! Distance between the `N`-agent system and its mean-field limit.

mod coupling;
mod scaling;

pub use coupling::{
    bernoulli_couple, coupled_unbiased_replica, coupled_unbiased_run, theorem_bound, CoupledSample,
    CouplingTrace, RichFraction,
};
pub use scaling::{
    empirical_vs_ode, l1_distance, limit_law, loglog_slope, scaling_study, ScalingEntry, ScalingReport,
};

/// Finite-`N` drift correction of the rich-biased empirical measure:
/// `R[p]_n = p_{n+1}/(n+1) + p_{n-1}/(n-1) 1[n>=2] - 2 p_n / n 1[n>=1]`.
/// The output has one more entry than `p`.
pub fn r_operator(p: &[f64]) -> Vec<f64> {
    let len = p.len() + 1;
    let at = |n: usize| p.get(n).copied().unwrap_or(0.0);
    (0..len)
        .map(|n| {
            let mut v = at(n + 1) / (n + 1) as f64;
            if n >= 2 {
                v += at(n - 1) / (n - 1) as f64;
            }
            if n >= 1 {
                v -= 2.0 * at(n) / n as f64;
            }
            v
        })
        .collect()
}
