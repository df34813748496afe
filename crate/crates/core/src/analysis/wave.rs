//! Split of a pmf into an atom at zero plus a travelling Gaussian bump,
//! `p ~ (1 - r) delta_0 + r N(c, sigma^2)`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

const SQRT_2PI: f64 = 2.5066282746310002;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveFit {
    /// Mass carried by the wave.
    pub r: f64,
    /// Wave center, in dollars.
    pub c: f64,
    /// Wave width, in dollars.
    pub sigma: f64,
    /// First index attributed to the wave.
    pub n_cut: usize,
    /// `sum_{n >= n_cut} p_n` and the conditional mean and standard
    /// deviation on that range; the starting point of the profile fit.
    pub moment_r: f64,
    pub moment_c: f64,
    pub moment_sigma: f64,
    /// l1 distance between `p` and the reconstructed two-component profile.
    pub residual: f64,
    /// The wave has vanished or is not yet separated from the atom at zero.
    pub degenerate: bool,
}

fn gaussian(n: f64, c: f64, sigma: f64) -> f64 {
    let z = (n - c) / sigma;
    (-0.5 * z * z).exp() / (sigma * SQRT_2PI)
}

/// Index of the highest local maximum at `n >= 1`, falling back to the
/// largest entry when `p` has no interior peak.
fn dominant_peak(p: &[f64]) -> usize {
    let len = p.len();
    let interior = (1..len.saturating_sub(1))
        .filter(|&i| p[i] >= p[i - 1] && p[i] > p[i + 1])
        .max_by(|&a, &b| p[a].total_cmp(&p[b]).then(b.cmp(&a)));
    interior.unwrap_or_else(|| (1..len).max_by(|&a, &b| p[a].total_cmp(&p[b]).then(b.cmp(&a))).unwrap_or(0))
}

fn ansatz_residual(p: &[f64], r: f64, c: f64, sigma: f64) -> f64 {
    p.iter()
        .enumerate()
        .map(|(n, &x)| {
            let wave = if sigma > 0.0 { r * gaussian(n as f64, c, sigma) } else { 0.0 };
            let atom = if n == 0 { 1.0 - r } else { 0.0 };
            (x - atom - wave).abs()
        })
        .sum()
}

/// Least-squares fit of `r * phi((n - c) / sigma) / sigma` to `p_n` over
/// `n >= from`, by damped Gauss-Newton iteration from `start`.
fn fit_profile(p: &[f64], from: usize, start: (f64, f64, f64)) -> (f64, f64, f64) {
    let cost = |r: f64, c: f64, s: f64| -> f64 {
        (from..p.len()).map(|n| (r * gaussian(n as f64, c, s) - p[n]).powi(2)).sum()
    };
    let (mut r, mut c, mut s) = start;
    let mut current = cost(r, c, s);
    let mut damping = 1e-3;
    for _ in 0..200 {
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jte = Vector3::<f64>::zeros();
        for n in from..p.len() {
            let x = n as f64;
            let g = gaussian(x, c, s);
            let e = r * g - p[n];
            let d = (x - c) / s;
            let j = Vector3::new(g, r * g * d / s, r * g * (d * d - 1.0) / s);
            jtj += j * j.transpose();
            jte += j * e;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj;
            for k in 0..3 {
                a[(k, k)] += damping * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-jte)) else {
                damping *= 10.0;
                continue;
            };
            let (nr, nc, ns) = (r + step[0], c + step[1], s + step[2]);
            if ns > 0.0 && nr > 0.0 {
                let trial = cost(nr, nc, ns);
                if trial < current {
                    let rel = (current - trial) / current.max(f64::MIN_POSITIVE);
                    (r, c, s, current) = (nr, nc, ns, trial);
                    damping = (damping * 0.3).max(1e-12);
                    improved = rel > 1e-14;
                    break;
                }
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (r, c, s)
}

/// Splits `p` at the lowest point between the atom at zero and the
/// dominant peak, then fits a Gaussian profile to the part to the right.
///
/// The fit is flagged degenerate when the wave mass is below `1e-6` or the
/// two components are not separated by a dip.
pub fn wave_decompose(p: &[f64]) -> WaveFit {
    let peak = dominant_peak(p);
    let n_cut = if peak >= 1 {
        (1..=peak).min_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b))).unwrap_or(1)
    } else {
        1
    };
    let tail = p.get(n_cut..).unwrap_or(&[]);
    let moment_r: f64 = tail.iter().sum();
    let (moment_c, moment_sigma) = if moment_r > 0.0 {
        let c = tail.iter().enumerate().map(|(k, x)| (k + n_cut) as f64 * x).sum::<f64>() / moment_r;
        let v = tail.iter().enumerate().map(|(k, x)| ((k + n_cut) as f64 - c).powi(2) * x).sum::<f64>()
            / moment_r;
        (c, v.sqrt())
    } else {
        (0.0, 0.0)
    };
    let separated = p.len() > 1 && peak >= 1 && p[0] >= p[1] && p[0] > p[n_cut] && p[n_cut] < p[peak];
    let degenerate = moment_r < 1e-6 || !separated;

    let (r, c, sigma) = if !degenerate && moment_sigma > 0.0 {
        fit_profile(p, n_cut, (moment_r, moment_c, moment_sigma))
    } else {
        (moment_r, moment_c, moment_sigma)
    };
    let residual = ansatz_residual(p, r, c, sigma);
    WaveFit { r, c, sigma, n_cut, moment_r, moment_c, moment_sigma, residual, degenerate }
}
