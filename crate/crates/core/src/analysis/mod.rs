//! Inequality indices, entropy, weighted norms and fits.

mod entropy;
mod gini;
mod norms;
mod powerlaw;
mod wave;

pub use entropy::{entropy, kl_divergence, unbiased_entropy_dissipation, KlDivergence};
pub use gini::{gini_pmf, gini_samples, gini_wave_approx};
pub use norms::{h0_distance, h0_distance_log, h0_inner, h1_norm};
pub use powerlaw::{fit_exponential_decay, fit_power_law, PowerLawFit};
pub use wave::{wave_decompose, WaveFit};

/// Power-law fits skip the transient before this time unless told otherwise.
pub const DEFAULT_FIT_START: f64 = 10.0;
