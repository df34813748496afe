use serde::{Deserialize, Serialize};

/// `H[p] = sum_n p_n log p_n` with `0 log 0 = 0`. Note the sign: this is
/// minus the Shannon entropy, and it decreases along the unbiased flow.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlDivergence {
    /// `+inf` when `support_violation` is set.
    pub value: f64,
    /// `p_n > 0` somewhere that `q_n = 0`.
    pub support_violation: bool,
}

/// `sum_n p_n log(p_n / q_n)`. Shorter inputs are read as zero-padded.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> KlDivergence {
    let mut value = 0.0;
    for (n, &pn) in p.iter().enumerate() {
        if pn <= 0.0 {
            continue;
        }
        let qn = q.get(n).copied().unwrap_or(0.0);
        if qn <= 0.0 {
            return KlDivergence { value: f64::INFINITY, support_violation: true };
        }
        value += pn * (pn / qn).ln();
    }
    KlDivergence { value, support_violation: false }
}

/// Rate of change of `H` along the unbiased flow, written as
/// `-KL(p || p~) - KL(p~ || p)` with `p~_0 = p_0` and `p~_n = r p_{n-1}`,
/// `r = 1 - p_0`. Needs `p_n > 0` for every `n` to be finite.
pub fn unbiased_entropy_dissipation(p: &[f64]) -> f64 {
    let r = 1.0 - p[0];
    let shifted: Vec<f64> = (0..p.len()).map(|n| if n == 0 { p[0] } else { r * p[n - 1] }).collect();
    -kl_divergence(p, &shifted).value - kl_divergence(&shifted, p).value
}
