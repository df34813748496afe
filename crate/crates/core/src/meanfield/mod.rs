//! Limit (`N -> infinity`) master equations on a truncated state space,
//! their equilibria and the spectrum of the poor-biased operator.

mod equilibrium;
mod generator;
mod integrate;
mod spectrum;

pub use equilibrium::{geometric_equilibrium, poisson_equilibrium, poisson_log_values, poisson_values};
pub use generator::{fokker_planck_poor, harmonic_weight, q_poor, q_rich, q_unbias, Generator};
pub use integrate::{
    integrate, Observer, OdeConfig, Schedule, DEFAULT_MASS_LEAK_TOL, LEAK_COLUMN, NEGATIVE_TOL,
};
pub use spectrum::{poor_eigenfunction, poor_eigenpairs, poor_spectral_gap, poor_spectrum, PoorSpectrum};

/// Default truncation: `max(1000, 20 mu)`.
pub fn default_n_max(mu: f64) -> usize {
    (20.0 * mu).ceil().max(1000.0) as usize
}
