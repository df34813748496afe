//! Spectral analysis of `-Q_poor`.
//!
//! `-Q_poor` is self-adjoint in the inner product weighted by `1 / p*`, so
//! conjugating with `diag(1 / sqrt(p*_n))` gives a real symmetric
//! tridiagonal matrix: diagonal `n + mu` (`mu` at `n = 0`), off-diagonal
//! `-sqrt(mu (n + 1))`. Building it from these closed forms avoids dividing
//! by the vanishing tail of `p*`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::equilibrium::poisson_values;
use crate::error::{Error, Result};

fn symmetrized(mu: f64, n_max: usize) -> DMatrix<f64> {
    let dim = n_max + 1;
    let mut m = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = if n == 0 { mu } else { n as f64 + mu };
        if n + 1 < dim {
            let off = -(mu * (n + 1) as f64).sqrt();
            m[(n, n + 1)] = off;
            m[(n + 1, n)] = off;
        }
    }
    m
}

/// Eigenpairs of `-Q_poor`, ascending. Eigenvectors are mapped back from
/// the symmetrized basis (multiplied by `sqrt(p*)`) and scaled to unit sum
/// of absolute values.
pub struct PoorSpectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

fn check(mu: f64, n_max: usize, k: usize) -> Result<()> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParam(format!("mu must be > 0, got {mu}")));
    }
    if k == 0 || k > n_max + 1 {
        return Err(Error::InvalidParam(format!("k = {k} outside 1..={}", n_max + 1)));
    }
    Ok(())
}

fn solve(mu: f64, n_max: usize) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let m = symmetrized(mu, n_max);
    let eig = m.try_symmetric_eigen(f64::EPSILON, 0);
    eig.ok_or_else(|| Error::Eigen(format!("no convergence for mu = {mu}, n_max = {n_max}")))
}

fn ascending(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    idx
}

/// The `k` smallest eigenvalues of `-Q_poor` truncated at `n_max`.
pub fn poor_spectrum(mu: f64, n_max: usize, k: usize) -> Result<Vec<f64>> {
    check(mu, n_max, k)?;
    let eig = solve(mu, n_max)?;
    Ok(ascending(&eig).into_iter().take(k).map(|i| eig.eigenvalues[i]).collect())
}

/// The `k` smallest eigenpairs of `-Q_poor` truncated at `n_max`.
pub fn poor_eigenpairs(mu: f64, n_max: usize, k: usize) -> Result<PoorSpectrum> {
    check(mu, n_max, k)?;
    let eig = solve(mu, n_max)?;
    let root: Vec<f64> = poisson_values(mu, n_max).into_iter().map(f64::sqrt).collect();
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for i in ascending(&eig).into_iter().take(k) {
        values.push(eig.eigenvalues[i]);
        let col = eig.eigenvectors.column(i);
        let mut v: Vec<f64> = col.iter().zip(&root).map(|(y, r)| y * r).collect();
        let norm: f64 = v.iter().map(|x| x.abs()).sum();
        let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
        v.iter_mut().for_each(|x| *x *= sign / norm);
        vectors.push(v);
    }
    Ok(PoorSpectrum { values, vectors })
}

/// Smallest nonzero eigenvalue of `-Q_poor`: the observed exponential
/// relaxation rate in the weighted norm.
pub fn poor_spectral_gap(mu: f64, n_max: usize) -> Result<f64> {
    Ok(poor_spectrum(mu, n_max, 2)?[1])
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Closed-form eigenfunction of `-Q_poor` for eigenvalue `k - 1`:
/// `p^(k)_n = sum_{j=0}^{min(n, k-1)} C(k-1, j) (-1)^j p*_{n-j}` with `p*` the
/// Poisson law. `k = 1` is the equilibrium itself.
pub fn poor_eigenfunction(k: usize, mu: f64, n_max: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParam("eigenfunction index k must be >= 1".into()));
    }
    if !(mu >= 0.0) {
        return Err(Error::InvalidParam(format!("mu must be >= 0, got {mu}")));
    }
    let pstar = poisson_values(mu, n_max);
    let coef: Vec<f64> = (0..k).map(|j| binomial(k - 1, j) * if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
    Ok((0..=n_max).map(|n| (0..=n.min(k - 1)).map(|j| coef[j] * pstar[n - j]).sum()).collect())
}
