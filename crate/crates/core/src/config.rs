//! Flat `key = value` experiment configuration.
//!
//! Every key is optional. Defaults: `rounds = 100`, `loss = exponential`,
//! `stump_mode` binary for exponential loss and confidence-rated for logistic,
//! `alpha` closed-form for binary stumps and line search otherwise,
//! `smoothing = 1/(2m)`, `seed = 0`, `epsilon_clip = 1e-6`, `k = 10`,
//! `init_batch = 500`, `batch = 200`, `iterations = 10`,
//! `strategy = uncertainty`, `label_column = label`. `eta` and `prior_column`
//! have no default. Unknown keys are rejected.

use std::path::Path;

use crate::active::{ActiveConfig, Strategy};
use crate::booster::{AlphaStrategy, BoostConfig, BoostLoss};
use crate::error::{Error, Result};
use crate::prior::PriorConfig;
use crate::scalar::Scalar;
use crate::stump::{StumpMode, StumpSearchConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub rounds: usize,
    pub loss: BoostLoss,
    pub stump_mode: Option<StumpMode>,
    pub alpha: Option<AlphaStrategy>,
    pub smoothing: Option<f64>,
    pub seed: u64,
    pub eta: Option<f64>,
    pub epsilon_clip: f64,
    pub k: usize,
    pub init_batch: usize,
    pub batch: usize,
    pub iterations: usize,
    pub strategy: Strategy,
    pub label_column: String,
    pub prior_column: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rounds: 100,
            loss: BoostLoss::Exponential,
            stump_mode: None,
            alpha: None,
            smoothing: None,
            seed: 0,
            eta: None,
            epsilon_clip: 1e-6,
            k: 10,
            init_batch: 500,
            batch: 200,
            iterations: 10,
            strategy: Strategy::Uncertainty,
            label_column: "label".into(),
            prior_column: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "rounds",
    "loss",
    "stump_mode",
    "alpha",
    "smoothing",
    "seed",
    "eta",
    "epsilon_clip",
    "k",
    "init_batch",
    "batch",
    "iterations",
    "strategy",
    "label_column",
    "prior_column",
];

fn parse_stump_mode(s: &str) -> Result<StumpMode> {
    match s {
        "binary" => Ok(StumpMode::Binary),
        "confidence" | "confidence_rated" => Ok(StumpMode::ConfidenceRated),
        other => Err(Error::Config(format!("unknown stump_mode `{other}`"))),
    }
}

pub fn stump_mode_name(m: StumpMode) -> &'static str {
    match m {
        StumpMode::Binary => "binary",
        StumpMode::ConfidenceRated => "confidence_rated",
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<V: std::str::FromStr>(key: &str, v: &str) -> Result<V> {
            v.parse().map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
        }
        match key {
            "rounds" => self.rounds = num(key, value)?,
            "loss" => self.loss = BoostLoss::parse(value)?,
            "stump_mode" => self.stump_mode = Some(parse_stump_mode(value)?),
            "alpha" => self.alpha = Some(AlphaStrategy::parse(value)?),
            "smoothing" => self.smoothing = Some(num(key, value)?),
            "seed" => self.seed = num(key, value)?,
            "eta" => self.eta = Some(num(key, value)?),
            "epsilon_clip" => self.epsilon_clip = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "init_batch" => self.init_batch = num(key, value)?,
            "batch" => self.batch = num(key, value)?,
            "iterations" => self.iterations = num(key, value)?,
            "strategy" => self.strategy = Strategy::parse(value)?,
            "label_column" => self.label_column = value.to_string(),
            "prior_column" => self.prior_column = Some(value.to_string()),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn resolved_stump_mode(&self) -> StumpMode {
        self.stump_mode.unwrap_or(match self.loss {
            BoostLoss::Exponential => StumpMode::Binary,
            BoostLoss::Logistic => StumpMode::ConfidenceRated,
        })
    }

    pub fn resolved_alpha(&self) -> AlphaStrategy {
        self.alpha.unwrap_or(match self.resolved_stump_mode() {
            StumpMode::Binary if self.loss == BoostLoss::Exponential => AlphaStrategy::ClosedFormBinary,
            _ => AlphaStrategy::LineSearch,
        })
    }

    pub fn boost<T: Scalar>(&self) -> Result<BoostConfig<T>> {
        let cfg = BoostConfig {
            rounds: self.rounds,
            loss: self.loss,
            stump: StumpSearchConfig {
                mode: self.resolved_stump_mode(),
                smoothing: self.smoothing.map(T::lit),
            },
            alpha: self.resolved_alpha(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Fails when `eta` was never given.
    pub fn prior<T: Scalar>(&self) -> Result<PriorConfig<T>> {
        let eta = self
            .eta
            .ok_or_else(|| Error::Config("`eta` has no default and must be set".into()))?;
        let cfg = PriorConfig {
            eta: T::lit(eta),
            epsilon_clip: T::lit(self.epsilon_clip),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn active<T: Scalar>(&self) -> Result<ActiveConfig<T>> {
        let cfg = ActiveConfig {
            init_batch: self.init_batch,
            batch: self.batch,
            iterations: self.iterations,
            strategy: self.strategy,
            boost: self.boost()?,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `key=value` pairs for the model file's provenance block.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("rounds".to_string(), self.rounds.to_string()),
            ("loss".to_string(), self.loss.name().to_string()),
            ("stump_mode".to_string(), stump_mode_name(self.resolved_stump_mode()).to_string()),
            ("alpha".to_string(), self.resolved_alpha().name().to_string()),
            ("seed".to_string(), self.seed.to_string()),
        ];
        if let Some(s) = self.smoothing {
            out.push(("smoothing".into(), s.to_string()));
        }
        if let Some(e) = self.eta {
            out.push(("eta".into(), e.to_string()));
            out.push(("epsilon_clip".into(), self.epsilon_clip.to_string()));
        }
        out
    }
}
