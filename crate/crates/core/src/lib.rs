//! Kinetic money-exchange models.
//!
//! Three binary exchange dynamics on `N` agents holding integer dollars:
//! at random times a giver `i` hands one dollar to a uniformly chosen
//! receiver `j`. The giver is picked
//!
//! * uniformly among agents with at least one dollar (**unbiased**),
//! * proportionally to its wealth (**poor-biased**),
//! * inversely proportionally to its wealth (**rich-biased**).
//!
//! The crate provides an exact event-driven simulator for the `N`-agent
//! systems ([`abm`]), a solver for the mean-field master equations that
//! describe the `N -> infinity` limit ([`meanfield`]), statistics and fits
//! ([`analysis`]), and Monte-Carlo experiments measuring the distance between
//! the two descriptions ([`chaos`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod abm;
pub mod analysis;
pub mod chaos;
pub mod cli;
pub mod error;
pub mod exec;
pub mod io;
pub mod meanfield;
pub mod plot;
pub mod types;

pub use error::{Error, Result};
pub use types::{Model, ModelParams, Pmf, TrajectoryRecord, WealthVector};

/// Version string embedded in every report.
pub const VERSION: &str = concat!("kinexch-v", env!("CARGO_PKG_VERSION"));
