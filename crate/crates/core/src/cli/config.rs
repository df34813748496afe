use std::fs;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Common, Init, Study};
use crate::error::{Error, Result};
use crate::meanfield::default_n_max;
use crate::types::{Model, ModelParams};
use crate::VERSION;

pub const SEED_ENV: &str = "KINEXCH_SEED";
pub const DEFAULT_SEED: u64 = 1;

/// Contents accepted by `--config`. Either a bare object with these keys or
/// an output envelope `{ "version", "config", "data" }`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub version: Option<String>,
    pub model: Option<Model>,
    pub models: Option<Vec<Model>>,
    pub lambda: Option<f64>,
    pub n_agents: Option<usize>,
    pub mu: Option<u64>,
    pub dt: Option<f64>,
    pub n_max: Option<usize>,
    pub t_end: Option<f64>,
    pub every: Option<f64>,
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub event_log: Option<bool>,
    pub init: Option<Init>,
    pub pmf_every: Option<f64>,
    pub study: Option<Study>,
    pub k: Option<usize>,
    pub n_values: Option<Vec<usize>>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut v: Value = serde_json::from_str(text)?;
        if let Some(obj) = v.as_object_mut() {
            if obj.contains_key("config") && obj.contains_key("data") {
                v = obj.remove("config").unwrap_or(Value::Null);
            }
        }
        Ok(serde_json::from_value(v)?)
    }
}

/// Fully resolved parameters of one run. Fields a command does not use are
/// left out of the serialized form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub version: String,
    pub models: Vec<Model>,
    pub lambda: f64,
    pub mu: u64,
    pub t_end: f64,
    pub every: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_agents: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event_log: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<Init>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pmf_every: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub study: Option<Study>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<usize>>,
}

impl ExperimentConfig {
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn model(&self) -> Model {
        self.models[0]
    }

    pub fn params(&self, model: Model, n_agents: usize) -> Result<ModelParams> {
        ModelParams::new(model, self.lambda, n_agents, self.mu, self.seed)
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParam(msg.into())
}

struct Sources<'a> {
    cli: &'a Common,
    file: ConfigFile,
}

impl<'a> Sources<'a> {
    fn load(cli: &'a Common, command: &str) -> Result<Self> {
        let file = match &cli.config {
            Some(path) => ConfigFile::from_json(&fs::read_to_string(path)?)?,
            None => ConfigFile::default(),
        };
        if let Some(c) = &file.command {
            if c != command {
                return Err(invalid(format!("config file is for `{c}`, not `{command}`")));
            }
        }
        Ok(Self { cli, file })
    }

    fn models(&self, default: &[Model]) -> Vec<Model> {
        if let Some(m) = self.cli.model.or(self.file.model) {
            vec![m]
        } else if let Some(ms) = &self.file.models {
            ms.clone()
        } else {
            default.to_vec()
        }
    }

    fn seed(&self) -> Result<u64> {
        if let Some(s) = self.cli.seed.or(self.file.seed) {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(s) => s.trim().parse().map_err(|_| invalid(format!("{SEED_ENV}={s:?} is not an integer"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }
}

macro_rules! pick {
    ($src:expr, $field:ident) => {
        $src.cli.$field.or($src.file.$field)
    };
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(format!("{name} must be positive, got {x}")))
    }
}

fn base(
    src: &Sources<'_>,
    command: &str,
    models: Vec<Model>,
    t_end: f64,
    every: f64,
) -> Result<ExperimentConfig> {
    if models.is_empty() {
        return Err(invalid("no model selected"));
    }
    let lambda = positive("lambda", pick!(src, lambda).unwrap_or(1.0))?;
    let t_end = positive("t_end", t_end)?;
    let every = positive("every", every)?;
    Ok(ExperimentConfig {
        command: command.into(),
        version: VERSION.into(),
        models,
        lambda,
        mu: 0,
        t_end,
        every,
        seed: src.seed()?,
        n_agents: None,
        dt: None,
        n_max: None,
        replicas: None,
        event_log: None,
        init: None,
        pmf_every: None,
        study: None,
        k: None,
        n_values: None,
    })
}

pub(super) fn resolve_abm(cli: &Common, event_log: bool) -> Result<ExperimentConfig> {
    let src = Sources::load(cli, "abm")?;
    let t_end = pick!(src, t_end).unwrap_or(100.0);
    let every = pick!(src, every).unwrap_or(0.5);
    let mut cfg = base(&src, "abm", src.models(&Model::ALL), t_end, every)?;
    cfg.mu = pick!(src, mu).unwrap_or(10);
    cfg.n_agents = Some(pick!(src, n_agents).unwrap_or(500));
    cfg.event_log = Some(event_log || src.file.event_log.unwrap_or(false));
    for &m in &cfg.models {
        cfg.params(m, cfg.n_agents.unwrap())?;
    }
    Ok(cfg)
}

/// Step, horizon and snapshot interval used when none are given.
pub(super) fn ode_defaults(model: Model) -> (f64, f64, f64) {
    match model {
        Model::Unbiased => (0.01, 100.0, 1.0),
        Model::PoorBiased => (0.002, 12.0, 0.1),
        Model::RichBiased => (5e-3, 500.0, 1.0),
    }
}

fn single_model(models: &[Model], command: &str) -> Result<()> {
    if models.len() != 1 {
        return Err(invalid(format!("`{command}` takes exactly one model")));
    }
    Ok(())
}

pub(super) fn resolve_ode(
    cli: &Common,
    init: Option<Init>,
    pmf_every: Option<f64>,
) -> Result<ExperimentConfig> {
    let src = Sources::load(cli, "ode")?;
    let models = src.models(&[Model::PoorBiased]);
    single_model(&models, "ode")?;
    let (dt, t_end, every) = ode_defaults(models[0]);
    let t_end = pick!(src, t_end).unwrap_or(t_end);
    let mut cfg = base(&src, "ode", models, t_end, pick!(src, every).unwrap_or(every))?;
    cfg.mu = pick!(src, mu).unwrap_or(5);
    cfg.dt = Some(positive("dt", pick!(src, dt).unwrap_or(dt))?);
    cfg.n_max = Some(pick!(src, n_max).unwrap_or_else(|| default_n_max(cfg.mu as f64)));
    cfg.init = Some(init.or(src.file.init).unwrap_or(Init::Dirac));
    cfg.pmf_every = Some(positive("pmf_every", pmf_every.or(src.file.pmf_every).unwrap_or(t_end / 5.0))?);
    if cfg.n_max.unwrap() < cfg.mu as usize {
        return Err(invalid("n_max must be at least mu"));
    }
    Ok(cfg)
}

pub(super) fn resolve_wave(cli: &Common) -> Result<ExperimentConfig> {
    let src = Sources::load(cli, "wave")?;
    let models = src.models(&[Model::RichBiased]);
    if models != [Model::RichBiased] {
        return Err(invalid("`wave` runs the rich-biased model only"));
    }
    let (dt, t_end, every) = ode_defaults(Model::RichBiased);
    let mut cfg =
        base(&src, "wave", models, pick!(src, t_end).unwrap_or(t_end), pick!(src, every).unwrap_or(every))?;
    cfg.mu = pick!(src, mu).unwrap_or(5);
    if cfg.mu == 0 {
        return Err(invalid("mu must be positive"));
    }
    cfg.dt = Some(positive("dt", pick!(src, dt).unwrap_or(dt))?);
    cfg.n_max = Some(pick!(src, n_max).unwrap_or_else(|| default_n_max(cfg.mu as f64)));
    Ok(cfg)
}

pub(super) fn resolve_chaos(
    cli: &Common,
    study: Option<Study>,
    k: Option<usize>,
    n_values: Option<Vec<usize>>,
) -> Result<ExperimentConfig> {
    let src = Sources::load(cli, "chaos")?;
    let study = study.or(src.file.study).unwrap_or(Study::Both);
    let default_model = if study == Study::Coupling { Model::Unbiased } else { Model::RichBiased };
    let models = src.models(&[default_model]);
    single_model(&models, "chaos")?;
    let t_end = pick!(src, t_end).unwrap_or(1.0);
    let mut cfg = base(&src, "chaos", models, t_end, pick!(src, every).unwrap_or(t_end / 10.0))?;
    cfg.mu = pick!(src, mu).unwrap_or(5);
    cfg.dt = Some(positive("dt", pick!(src, dt).unwrap_or(1e-3))?);
    cfg.replicas = Some(pick!(src, replicas).unwrap_or(100));
    cfg.study = Some(study);
    cfg.n_agents = Some(pick!(src, n_agents).unwrap_or(1000));
    cfg.k = Some(k.or(src.file.k).unwrap_or(1));
    let ns = n_values.or(src.file.n_values.clone()).unwrap_or_else(|| vec![100, 316, 1000, 3162, 10000]);
    if ns.len() < 2 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("n_values must hold >= 2 strictly increasing sizes"));
    }
    cfg.n_values = Some(ns);
    if cfg.replicas.unwrap() < 2 {
        return Err(invalid("need at least 2 replicas"));
    }
    let k = cfg.k.unwrap();
    if k == 0 || k > cfg.n_agents.unwrap() {
        return Err(invalid(format!("k = {k} outside 1..=n_agents")));
    }
    cfg.params(cfg.model(), cfg.n_agents.unwrap())?;
    Ok(cfg)
}

pub(super) fn resolve_selftest(cli: &Common) -> Result<ExperimentConfig> {
    let src = Sources::load(cli, "selftest")?;
    let mut cfg = base(&src, "selftest", Model::ALL.to_vec(), 1.0, 1.0)?;
    cfg.mu = 5;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common() -> Common {
        Common { out: "out".into(), ..Default::default() }
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"seed": 9, "mu": 3, "models": ["unbiased", "rich-biased"]}"#).unwrap();
        let mut c = common();
        c.config = Some(path.clone());
        let cfg = resolve_abm(&c, false).unwrap();
        assert_eq!((cfg.seed, cfg.mu, cfg.n_agents), (9, 3, Some(500)));
        assert_eq!(cfg.models, vec![Model::Unbiased, Model::RichBiased]);
        c.seed = Some(4);
        c.model = Some(Model::PoorBiased);
        let cfg = resolve_abm(&c, false).unwrap();
        assert_eq!((cfg.seed, cfg.models.as_slice()), (4, &[Model::PoorBiased][..]));
    }

    #[test]
    fn emitted_config_round_trips() {
        let cfg = resolve_ode(&common(), None, None).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, &text).unwrap();
        let mut c = common();
        c.config = Some(path);
        assert_eq!(resolve_ode(&c, None, None).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = common();
        c.lambda = Some(-1.0);
        assert!(resolve_abm(&c, false).is_err());
        assert!(ConfigFile::from_json(r#"{"sede": 1}"#).is_err());
        let mut c = common();
        c.model = Some(Model::Unbiased);
        assert!(resolve_wave(&c).is_err());
    }
}
