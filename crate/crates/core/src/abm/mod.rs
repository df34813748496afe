//! Exact event-driven simulation of the `N`-agent dynamics.
//!
//! The `N^2` pairwise clocks of rate `lambda / N` are superposed into one
//! clock with the total giving rate; each firing picks a giver by rate and a
//! receiver uniformly.

mod engine;
pub mod fenwick;
mod rates;

pub use engine::{run, step, stream_rng, Event, EventLog, LoggedEvent, RunOptions, RunOutput, Simulation};
pub use rates::{RateTable, REBUILD_EVERY};
