use crate::error::{Error, Result};
use crate::types::Pmf;

fn check_mu(mu: f64) -> Result<()> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::InvalidParam(format!("mu must be finite and >= 0, got {mu}")));
    }
    Ok(())
}

/// Geometric law `p_n = p_0 (1 - p_0)^n` with `p_0 = 1 / (1 + mu)`,
/// renormalized on `0..=n_max`. Stationary for the unbiased dynamics.
pub fn geometric_equilibrium(mu: f64, n_max: usize) -> Result<Pmf> {
    check_mu(mu)?;
    let p0 = 1.0 / (1.0 + mu);
    let q = 1.0 - p0;
    let mut w = Vec::with_capacity(n_max + 1);
    let mut x = p0;
    for _ in 0..=n_max {
        w.push(x);
        x *= q;
    }
    Pmf::from_weights(w)
}

/// `ln(mu^n e^{-mu} / n!)` on `0..=n_max`.
pub fn poisson_log_values(mu: f64, n_max: usize) -> Vec<f64> {
    let ln_mu = mu.ln();
    let mut lp = -mu;
    let mut v = Vec::with_capacity(n_max + 1);
    v.push(lp);
    for n in 1..=n_max {
        lp += ln_mu - (n as f64).ln();
        v.push(lp);
    }
    v
}

/// `mu^n e^{-mu} / n!` on `0..=n_max`, without renormalization. Computed in
/// log space so entries far in the tail degrade gracefully to subnormals.
pub fn poisson_values(mu: f64, n_max: usize) -> Vec<f64> {
    if mu == 0.0 {
        let mut v = vec![0.0; n_max + 1];
        v[0] = 1.0;
        return v;
    }
    poisson_log_values(mu, n_max).into_iter().map(f64::exp).collect()
}

/// Poisson law renormalized on `0..=n_max`. Stationary for the poor-biased
/// dynamics.
pub fn poisson_equilibrium(mu: f64, n_max: usize) -> Result<Pmf> {
    check_mu(mu)?;
    Pmf::from_weights(poisson_values(mu, n_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_mu5() {
        let p = geometric_equilibrium(5.0, 1000).unwrap();
        assert!((p[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((p.mean() - 5.0).abs() < 1e-9);
        assert!((geometric_equilibrium(1e3, 100_000).unwrap()[0] - 1.0 / 1001.0).abs() < 1e-15);
    }

    #[test]
    fn poisson_mu5() {
        let p = poisson_equilibrium(5.0, 1000).unwrap();
        assert!((p[0] - 0.006737946999085467).abs() < 1e-17);
        assert!((p.mean() - 5.0).abs() < 1e-9);
        assert_eq!(poisson_equilibrium(0.0, 10).unwrap()[0], 1.0);
    }

    #[test]
    fn poisson_tail_is_finite() {
        let v = poisson_values(5.0, 1000);
        assert!(v.iter().all(|x| x.is_finite() && *x >= 0.0));
        assert!(v[150] > 0.0);
    }
}
