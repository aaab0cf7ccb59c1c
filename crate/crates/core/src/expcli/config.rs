use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ssp::default_q_grid;

/// Acquisition methods compared by `eval`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exhaustive,
    Hierarchical,
    Random,
    QLearning,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Exhaustive,
        Method::Hierarchical,
        Method::Random,
        Method::QLearning,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::Hierarchical => "hierarchical",
            Method::Random => "random",
            Method::QLearning => "qlearning",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::param(format!("unknown method `{s}`")))
    }
}

/// Every knob of the experiment pipeline.
///
/// Read from a flat `key = value` file (`#` starts a comment); command-line
/// flags are applied on top with [`ExperimentConfig::set`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub layers: usize,
    pub snr_db: f64,
    pub tau: f64,
    pub tau_sweep: Vec<f64>,
    pub q_grid: Vec<f64>,
    /// `None` derives the floor from the dataset variance.
    pub eps_floor: Option<f64>,
    pub alpha: f64,
    pub epsilon: f64,
    pub max_epoch: usize,
    pub max_channel: Option<usize>,
    /// Defaults to the probing codebook size.
    pub max_l: Option<usize>,
    pub n_dataset: usize,
    pub n_eval_channels: usize,
    pub deact_seed: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub methods: Vec<Method>,
    /// Largest pilot budget evaluated; defaults to the probing codebook size.
    pub budget: Option<usize>,
    pub eval_in_dataset: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 64,
            n: 100,
            layers: 3,
            snr_db: 20.0,
            tau: 0.9,
            tau_sweep: vec![0.7, 0.9, 0.95],
            q_grid: default_q_grid(),
            eps_floor: None,
            alpha: 0.1,
            epsilon: 0.1,
            max_epoch: 200,
            max_channel: None,
            max_l: None,
            n_dataset: 500,
            n_eval_channels: 1000,
            deact_seed: 0,
            seed: 1,
            out: PathBuf::from("out"),
            methods: Method::ALL.to_vec(),
            budget: None,
            eval_in_dataset: false,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::param(format!("`{key}`: cannot parse `{value}`")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| num(key, v))
        .collect()
}

fn optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    match value {
        "auto" | "all" => Ok(None),
        v => num(key, v).map(Some),
    }
}

impl ExperimentConfig {
    /// Parse a config file body; unspecified keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse("config", i + 1, "expected `key = value`"))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::InvalidParameter(msg) => Error::parse("config", i + 1, msg),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "m" | "M" => self.m = num(key, value)?,
            "n" | "N" => self.n = num(key, value)?,
            "layers" | "L" => self.layers = num(key, value)?,
            "snr_db" => self.snr_db = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "tau_sweep" => self.tau_sweep = list(key, value)?,
            "q_grid" => self.q_grid = list(key, value)?,
            "eps_floor" => self.eps_floor = optional(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "max_epoch" => self.max_epoch = num(key, value)?,
            "max_channel" => self.max_channel = optional(key, value)?,
            "max_l" | "max_L" => self.max_l = optional(key, value)?,
            "n_dataset" => self.n_dataset = num(key, value)?,
            "n_eval_channels" => self.n_eval_channels = num(key, value)?,
            "deact_seed" => self.deact_seed = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "methods" => self.methods = list(key, value)?,
            "budget" => self.budget = optional(key, value)?,
            "eval_in_dataset" => self.eval_in_dataset = num(key, value)?,
            _ => return Err(Error::param(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::param(msg));
        if self.m == 0 || self.n == 0 {
            return fail("M and N must be positive".into());
        }
        if self.layers == 0 || self.layers > 16 {
            return fail(format!("layers = {} outside 1..=16", self.layers));
        }
        if !self.n.is_multiple_of(1 << (self.layers - 1)) {
            return fail(format!(
                "N = {} not divisible by 2^(L-1) = {}",
                self.n,
                1 << (self.layers - 1)
            ));
        }
        if !self.snr_db.is_finite() {
            return fail("snr_db must be finite".into());
        }
        for &t in std::iter::once(&self.tau).chain(&self.tau_sweep) {
            if !(t > 0.0 && t < 1.0) {
                return fail(format!("tau = {t} outside (0, 1)"));
            }
        }
        if self.tau_sweep.is_empty() {
            return fail("tau_sweep is empty".into());
        }
        if let Some(e) = self.eps_floor {
            if !(e > 0.0 && e.is_finite()) {
                return fail(format!("eps_floor = {e} must be positive"));
            }
        }
        if self.n_dataset == 0 || self.n_eval_channels == 0 {
            return fail("n_dataset and n_eval_channels must be at least 1".into());
        }
        if self.methods.is_empty() {
            return fail("no methods selected".into());
        }
        if self.budget == Some(0) || self.max_l == Some(0) {
            return fail("budget and max_L must be at least 1".into());
        }
        Ok(())
    }

    /// Probing codebook size `2^(L+1) − 2`.
    pub fn np(&self) -> usize {
        (1 << (self.layers + 1)) - 2
    }

    pub fn max_l(&self) -> usize {
        self.max_l.unwrap_or_else(|| self.np())
    }

    pub fn budget(&self) -> usize {
        self.budget.unwrap_or_else(|| self.np())
    }
}
