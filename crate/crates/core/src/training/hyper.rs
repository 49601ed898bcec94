use std::path::Path;

use crate::autodiff::AdamConfig;
use crate::error::{Error, Result};
use crate::model::ModelConfig;

/// Optimisation settings. Defaults follow the full-size baseline, except the
/// learning rate (see `learning_rate`).
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingHyper {
    /// Initial Adam step size. Defaults to 2e-3; 0.2 can be set explicitly.
    pub learning_rate: f64,
    pub anneal_base: f64,
    pub anneal_denom: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size_sentences: usize,
    pub emb_dropout: f64,
    pub dropout: f64,
    pub seed: u64,
    /// Softmax temperature of the distillation KL terms.
    pub temperature: f64,
    /// Words seen fewer times in training map to UNK.
    pub min_freq: usize,
}

impl Default for TrainingHyper {
    fn default() -> Self {
        TrainingHyper {
            learning_rate: 2e-3,
            anneal_base: 0.75,
            anneal_denom: 5000.0,
            beta1: 0.9,
            beta2: 0.9,
            epsilon: 1e-12,
            epochs: 100,
            batch_size_sentences: 32,
            emb_dropout: 0.33,
            dropout: 0.33,
            seed: 1,
            temperature: 1.0,
            min_freq: 2,
        }
    }
}

impl TrainingHyper {
    pub const KEYS: [&'static str; 13] = [
        "learning_rate",
        "anneal_base",
        "anneal_denom",
        "beta1",
        "beta2",
        "epsilon",
        "epochs",
        "batch_size_sentences",
        "emb_dropout",
        "dropout",
        "seed",
        "temperature",
        "min_freq",
    ];

    /// Zero epochs is allowed and yields an untrained model.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("anneal_base", self.anneal_base),
            ("anneal_denom", self.anneal_denom),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("epsilon", self.epsilon),
            ("temperature", self.temperature),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{} must be positive, got {}", name, v)));
            }
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if v >= 1.0 {
                return Err(Error::Config(format!("{} must be below 1, got {}", name, v)));
            }
        }
        for (name, rate) in [("emb_dropout", self.emb_dropout), ("dropout", self.dropout)] {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::Config(format!("{} must be in [0, 1), got {}", name, rate)));
            }
        }
        if self.batch_size_sentences == 0 {
            return Err(Error::Config("batch_size_sentences must be positive".into()));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            anneal_base: self.anneal_base,
            anneal_steps: self.anneal_denom,
        }
    }

    /// Sets one field from text. Returns `false` for unknown keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("invalid value '{}' for {}", v.trim(), key)))
        }
        match key {
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "anneal_base" => self.anneal_base = parse(key, value)?,
            "anneal_denom" => self.anneal_denom = parse(key, value)?,
            "beta1" => self.beta1 = parse(key, value)?,
            "beta2" => self.beta2 = parse(key, value)?,
            "epsilon" => self.epsilon = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "batch_size_sentences" => self.batch_size_sentences = parse(key, value)?,
            "emb_dropout" => self.emb_dropout = parse(key, value)?,
            "dropout" => self.dropout = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "temperature" => self.temperature = parse(key, value)?,
            "min_freq" => self.min_freq = parse(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Model and training settings read from one `key = value` file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub hyper: TrainingHyper,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::full(1, 1, 1),
            hyper: TrainingHyper::default(),
        }
    }
}

impl RunConfig {
    /// Applies one setting. Dropout rates exist in both halves and are set
    /// together. Vocabulary-derived sizes are accepted but replaced once the
    /// vocabulary is built.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let in_hyper = self.hyper.set(key, value)?;
        let in_model = self.model.set(key, value)?;
        if !in_hyper && !in_model {
            return Err(Error::Config(format!("unknown configuration key '{}'", key)));
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{}' is not key=value", assignment)))?;
        self.set(k.trim(), v)
    }

    /// Parses `key = value` lines on top of the defaults. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Format {
                line: i + 1,
                message: format!("expected key = value, got '{}'", line),
            })?;
            config.set(k.trim(), v).map_err(|e| Error::Format {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(config)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
