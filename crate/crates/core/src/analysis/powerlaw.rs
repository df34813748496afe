use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `value ~ amplitude * t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * t.powf(self.exponent)
    }
}

/// Ordinary least squares of `log value` on `log t`.
pub fn fit_power_law(times: &[f64], values: &[f64]) -> Result<PowerLawFit> {
    if times.len() != values.len() {
        return Err(Error::InvalidParam("times and values differ in length".into()));
    }
    if times.len() < 5 {
        return Err(Error::InvalidParam(format!("need at least 5 points, got {}", times.len())));
    }
    if let Some(bad) = times.iter().chain(values).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParam(format!("power-law fit needs positive finite data, got {bad}")));
    }
    let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParam("all times are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(PowerLawFit { amplitude: intercept.exp(), exponent: slope, r_squared })
}

/// Exponential rate `k` in `value ~ A e^{-k t}`, from least squares on
/// `log value`.
pub fn fit_exponential_decay(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::InvalidParam("need at least 2 matching points".into()));
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParam("decay fit needs positive values".into()));
    }
    let m = times.len() as f64;
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mt = times.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let stt: f64 = times.iter().map(|t| (t - mt).powi(2)).sum();
    let sty: f64 = times.iter().zip(&y).map(|(t, b)| (t - mt) * (b - my)).sum();
    Ok(-sty / stt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let t: Vec<f64> = (1..=20).map(|k| k as f64 * 3.0).collect();
        let v: Vec<f64> = t.iter().map(|t| 2.0 * t.sqrt()).collect();
        let f = fit_power_law(&t, &v).unwrap();
        assert!((f.amplitude - 2.0).abs() < 1e-12);
        assert!((f.exponent - 0.5).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let t = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(fit_power_law(&t, &[1.0, 2.0, 0.0, 4.0, 5.0]).is_err());
        assert!(fit_power_law(&t[..4], &[1.0; 4]).is_err());
    }

    #[test]
    fn exact_decay() {
        let t: Vec<f64> = (0..10).map(f64::from).collect();
        let v: Vec<f64> = t.iter().map(|t| 3.0 * (-2.0 * t).exp()).collect();
        assert!((fit_exponential_decay(&t, &v).unwrap() - 2.0).abs() < 1e-12);
    }
}
