use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("state has an agent with {max} dollars but n_max is {n_max}; enlarge n_max")]
    Truncation { max: u64, n_max: usize },

    #[error("index {index} out of range 0..={n_max}")]
    Range { index: usize, n_max: usize },

    #[error("absorbing state reached at t = {t} after {events} events")]
    Absorbing { t: f64, events: u64 },

    #[error(
        "mass leaked past n_max = {n_max} exceeds tolerance at t = {t}: leak = {leak:e} (enlarge n_max)"
    )]
    MassLeak { t: f64, leak: f64, n_max: usize },

    #[error("mean drifted at t = {t}: |mean - mu| = {drift:e}")]
    MeanDrift { t: f64, drift: f64 },

    #[error("negative probability {value:e} at n = {index}, t = {t}")]
    NegativeProbability { t: f64, index: usize, value: f64 },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("{0}")]
    Undefined(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
