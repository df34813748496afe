use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::rates::RateTable;
use crate::analysis::gini_samples;
use crate::error::{Error, Result};
use crate::types::{empirical_pmf, Halt, ModelParams, TrajectoryRecord, WealthVector};

/// One firing of the aggregated clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub giver: usize,
    pub receiver: usize,
    pub dt: f64,
}

/// Running event count and clock.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub count: u64,
    pub t: f64,
}

/// An executed event with its absolute time, for the optional debug log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoggedEvent {
    pub t: f64,
    pub giver: usize,
    pub receiver: usize,
}

/// Independent random stream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_dt<R: Rng + ?Sized>(total_rate: f64, rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e / total_rate
}

fn execute<R: Rng + ?Sized>(state: &mut WealthVector, rates: &mut RateTable, rng: &mut R) -> (usize, usize) {
    let giver = rates.sample_giver(state, rng);
    let receiver = rng.random_range(0..state.len());
    state.transfer(giver, receiver);
    rates.on_transfer(state, giver, receiver);
    (giver, receiver)
}

/// Fires one event: waiting time, giver by rate, receiver uniform over all
/// agents (a self-draw moves nothing). Returns `None` when every rate is zero.
pub fn step<R: Rng + ?Sized>(state: &mut WealthVector, rates: &mut RateTable, rng: &mut R) -> Option<Event> {
    let total = rates.total_rate();
    if !(total > 0.0) {
        return None;
    }
    let dt = draw_dt(total, rng);
    let (giver, receiver) = execute(state, rates, rng);
    Some(Event { giver, receiver, dt })
}

/// A single `N`-agent system advancing in continuous time.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: ModelParams,
    state: WealthVector,
    rates: RateTable,
    rng: ChaCha8Rng,
    log: EventLog,
    next_at: Option<f64>,
    history: Option<Vec<LoggedEvent>>,
}

impl Simulation {
    /// Everyone starts with `mu` dollars; randomness from stream 0 of `seed`.
    pub fn new(params: ModelParams) -> Result<Self> {
        Self::with_stream(params, 0)
    }

    pub fn with_stream(params: ModelParams, stream: u64) -> Result<Self> {
        params.validate()?;
        let state = WealthVector::uniform(params.n_agents, params.mu);
        Self::from_state(params, state, stream_rng(params.seed, stream))
    }

    /// Starts from an arbitrary state; its total need not equal `N * mu`.
    pub fn from_state(params: ModelParams, state: WealthVector, rng: ChaCha8Rng) -> Result<Self> {
        params.validate()?;
        if state.len() != params.n_agents {
            return Err(Error::InvalidParam(format!(
                "state has {} agents, params say {}",
                state.len(),
                params.n_agents
            )));
        }
        let rates = RateTable::new(params.model, params.lambda, &state);
        Ok(Self { params, state, rates, rng, log: EventLog::default(), next_at: None, history: None })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn state(&self) -> &WealthVector {
        &self.state
    }

    pub fn rates(&self) -> &RateTable {
        &self.rates
    }

    pub fn log(&self) -> EventLog {
        self.log
    }

    pub fn time(&self) -> f64 {
        self.log.t
    }

    pub fn record_events(&mut self) {
        self.history.get_or_insert_with(Vec::new);
    }

    pub fn take_events(&mut self) -> Option<Vec<LoggedEvent>> {
        self.history.take()
    }

    fn absorbing(&self) -> Error {
        Error::Absorbing { t: self.log.t, events: self.log.count }
    }

    /// Time of the next event. The waiting time is drawn once and kept, so
    /// the event sequence does not depend on where the run is observed.
    fn next_time(&mut self) -> Option<f64> {
        if self.next_at.is_none() {
            let total = self.rates.total_rate();
            if !(total > 0.0) {
                return None;
            }
            self.next_at = Some(self.log.t + draw_dt(total, &mut self.rng));
        }
        self.next_at
    }

    fn fire(&mut self, at: f64) -> Event {
        let dt = at - self.log.t;
        let (giver, receiver) = execute(&mut self.state, &mut self.rates, &mut self.rng);
        self.log.t = at;
        self.log.count += 1;
        self.next_at = None;
        if let Some(h) = &mut self.history {
            h.push(LoggedEvent { t: at, giver, receiver });
        }
        Event { giver, receiver, dt }
    }

    /// Executes the next event.
    pub fn step(&mut self) -> Result<Event> {
        let at = self.next_time().ok_or_else(|| self.absorbing())?;
        Ok(self.fire(at))
    }

    /// Executes every event up to time `t` and leaves the clock at `t`.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        loop {
            let Some(at) = self.next_time() else {
                return Err(self.absorbing());
            };
            if at > t {
                break;
            }
            self.fire(at);
        }
        self.log.t = self.log.t.max(t);
        Ok(())
    }

    /// Executes exactly `k` more events.
    pub fn run_events(&mut self, k: u64) -> Result<()> {
        for _ in 0..k {
            self.step()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces the all-equal initial state.
    pub initial: Option<WealthVector>,
    /// Random stream, e.g. the replica index.
    pub stream: u64,
    pub event_log: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Per snapshot: the empirical pmf on `0..=max S_i` plus `gini`, `events`.
    pub record: TrajectoryRecord,
    pub states: Vec<WealthVector>,
    pub log: EventLog,
    pub events: Option<Vec<LoggedEvent>>,
}

/// Simulates up to `t_end` and snapshots the state at each requested time.
pub fn run(params: ModelParams, t_end: f64, snapshot_times: &[f64], opts: RunOptions) -> Result<RunOutput> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidParam(format!("t_end must be > 0, got {t_end}")));
    }
    if let Some(&t) = snapshot_times.iter().find(|&&t| !(0.0..=t_end).contains(&t)) {
        return Err(Error::InvalidParam(format!("snapshot time {t} outside [0, {t_end}]")));
    }
    let mut sim = match opts.initial {
        Some(state) => Simulation::from_state(params, state, stream_rng(params.seed, opts.stream))?,
        None => Simulation::with_stream(params, opts.stream)?,
    };
    if opts.event_log {
        sim.record_events();
    }
    let mut record = TrajectoryRecord::new(vec!["gini".into(), "events".into()]);
    let mut states = Vec::with_capacity(snapshot_times.len());
    for &t in snapshot_times {
        if let Err(e) = sim.advance_to(t) {
            if let Error::Absorbing { t, events } = e {
                record.halted = Some(Halt { t, events });
                break;
            }
            return Err(e);
        }
        let state = sim.state().clone();
        let pmf = empirical_pmf(&state, state.max() as usize)?;
        let gini = gini_samples(&state).unwrap_or(f64::NAN);
        record.push(t, pmf, vec![gini, sim.log().count as f64])?;
        states.push(state);
    }
    if record.halted.is_none() {
        if let Err(Error::Absorbing { t, events }) = sim.advance_to(t_end) {
            record.halted = Some(Halt { t, events });
        }
    }
    Ok(RunOutput { record, states, log: sim.log(), events: sim.take_events() })
}
