use crate::error::{Error, Result};
use crate::types::WealthVector;

/// Gini index `sum_ij |S_i - S_j| / (2 N^2 mu)` of an agent population,
/// evaluated after sorting with the identity
/// `sum_{i<j} |x_(i) - x_(j)| = sum_i (2i - N + 1) x_(i)`.
pub fn gini_samples(state: &WealthVector) -> Result<f64> {
    let n = state.len();
    if n < 2 {
        return Err(Error::Undefined("Gini index needs at least two agents".into()));
    }
    let total = state.total();
    if total == 0 {
        return Err(Error::Undefined("Gini index of a zero-wealth population".into()));
    }
    let mut x = state.as_slice().to_vec();
    x.sort_unstable();
    let half_sum: i128 =
        x.iter().enumerate().map(|(i, &v)| (2 * i as i128 - n as i128 + 1) * v as i128).sum();
    // 2 * half_sum / (2 N^2 mu) with N mu = total
    Ok(half_sum as f64 / (n as f64 * total as f64))
}

/// Gini index `(1 / 2 mu) sum_ij |i - j| p_i p_j` of a pmf, in linear time
/// from running sums of `p_j` and `j p_j` below each `i`.
pub fn gini_pmf(p: &[f64]) -> Result<f64> {
    let mut below = 0.0;
    let mut below_mean = 0.0;
    let mut acc = 0.0;
    let mut mean = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        let x = i as f64;
        acc += pi * (x * below - below_mean);
        below += pi;
        below_mean += x * pi;
        mean += x * pi;
    }
    if !(mean > 0.0) {
        return Err(Error::Undefined("Gini index of a pmf with zero mean".into()));
    }
    Ok(acc / mean)
}

/// Gini index of the two-component profile `(1 - r) delta_0 + r N(c, sigma^2)`
/// with `r c = mu`, to leading order for a narrow wave.
pub fn gini_wave_approx(mu: f64, c: f64, sigma: f64) -> f64 {
    1.0 - mu / c + mu * sigma / (std::f64::consts::PI.sqrt() * c * c)
}
