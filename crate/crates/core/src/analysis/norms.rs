//! Norms weighted by an equilibrium `p*`:
//! `<p, q>_0 = sum p_n q_n / p*_n` and
//! `|p|_1^2 = sum p*_n (p_{n+1}/p*_{n+1} - p_n/p*_n)^2`.
//!
//! Where `p*` has underflowed to zero the compared entries must vanish too;
//! such indices are skipped.

use crate::error::{Error, Result};

fn ratio(x: f64, w: f64, n: usize) -> Result<Option<f64>> {
    if w > 0.0 {
        Ok(Some(x / w))
    } else if x == 0.0 {
        Ok(None)
    } else {
        Err(Error::InvalidParam(format!("reference weight vanishes at n = {n} where the input is {x:e}")))
    }
}

pub fn h0_inner(p: &[f64], q: &[f64], pstar: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for n in 0..p.len().max(q.len()) {
        let a = p.get(n).copied().unwrap_or(0.0);
        let b = q.get(n).copied().unwrap_or(0.0);
        let w = pstar.get(n).copied().unwrap_or(0.0);
        if let Some(u) = ratio(a * b, w, n)? {
            acc += u;
        }
    }
    Ok(acc)
}

pub fn h0_distance(p: &[f64], q: &[f64], pstar: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for n in 0..p.len().max(q.len()) {
        let d = p.get(n).copied().unwrap_or(0.0) - q.get(n).copied().unwrap_or(0.0);
        let w = pstar.get(n).copied().unwrap_or(0.0);
        if let Some(u) = ratio(d * d, w, n)? {
            acc += u;
        }
    }
    Ok(acc.sqrt())
}

/// Same as [`h0_distance`] with the weights given as `ln p*_n`, so entries
/// where `p*` is below the smallest representable double still count.
pub fn h0_distance_log(p: &[f64], q: &[f64], log_pstar: &[f64]) -> f64 {
    let mut acc = 0.0;
    for n in 0..p.len().max(q.len()) {
        let d = (p.get(n).copied().unwrap_or(0.0) - q.get(n).copied().unwrap_or(0.0)).abs();
        if d > 0.0 {
            let lw = log_pstar.get(n).copied().unwrap_or(f64::NEG_INFINITY);
            acc += (2.0 * d.ln() - lw).exp();
        }
    }
    acc.sqrt()
}

/// Truncated sum over `n < len - 1`.
pub fn h1_norm(p: &[f64], pstar: &[f64]) -> Result<f64> {
    let u: Vec<Option<f64>> = p
        .iter()
        .enumerate()
        .map(|(n, &x)| ratio(x, pstar.get(n).copied().unwrap_or(0.0), n))
        .collect::<Result<_>>()?;
    let mut acc = 0.0;
    for n in 0..p.len().saturating_sub(1) {
        if let (Some(a), Some(b)) = (u[n], u[n + 1]) {
            // scaled before squaring: p/p* can exceed sqrt(f64::MAX) in the tail
            let d = pstar[n].sqrt() * (b - a);
            acc += d * d;
        }
    }
    Ok(acc.sqrt())
}
