use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Layer sizes and dropout rates of a biaffine parser.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub word_dim: usize,
    pub upos_dim: usize,
    /// BiLSTM output width, both directions together.
    pub lstm_dim: usize,
    pub lstm_layers: usize,
    pub arc_mlp_dim: usize,
    pub label_mlp_dim: usize,
    pub mlp_layers: usize,
    pub emb_dropout: f64,
    pub dropout: f64,
    pub label_count: usize,
    pub word_vocab_size: usize,
    pub upos_vocab_size: usize,
}

impl ModelConfig {
    /// The full-size baseline: 100-d word and tag embeddings, three 400-d
    /// BiLSTM layers, 500-d arc and 100-d label MLPs, dropout 0.33.
    pub fn full(word_vocab_size: usize, upos_vocab_size: usize, label_count: usize) -> Self {
        ModelConfig {
            word_dim: 100,
            upos_dim: 100,
            lstm_dim: 400,
            lstm_layers: 3,
            arc_mlp_dim: 500,
            label_mlp_dim: 100,
            mlp_layers: 1,
            emb_dropout: 0.33,
            dropout: 0.33,
            label_count,
            word_vocab_size,
            upos_vocab_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("word_dim", self.word_dim),
            ("upos_dim", self.upos_dim),
            ("lstm_dim", self.lstm_dim),
            ("lstm_layers", self.lstm_layers),
            ("arc_mlp_dim", self.arc_mlp_dim),
            ("label_mlp_dim", self.label_mlp_dim),
            ("mlp_layers", self.mlp_layers),
            ("label_count", self.label_count),
            ("word_vocab_size", self.word_vocab_size),
            ("upos_vocab_size", self.upos_vocab_size),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Config(format!("{} must be at least 1", name)));
            }
        }
        if !self.lstm_dim.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "lstm_dim must be even, got {}",
                self.lstm_dim
            )));
        }
        for (name, rate) in [("emb_dropout", self.emb_dropout), ("dropout", self.dropout)] {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::Config(format!("{} must be in [0, 1), got {}", name, rate)));
            }
        }
        Ok(())
    }

    pub fn lstm_hidden(&self) -> usize {
        self.lstm_dim / 2
    }

    pub const KEYS: [&'static str; 12] = [
        "word_dim",
        "upos_dim",
        "lstm_dim",
        "lstm_layers",
        "arc_mlp_dim",
        "label_mlp_dim",
        "mlp_layers",
        "emb_dropout",
        "dropout",
        "label_count",
        "word_vocab_size",
        "upos_vocab_size",
    ];

    /// Sets one field from its textual value. Returns `false` for unknown
    /// keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        fn int(key: &str, v: &str) -> Result<usize> {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("{} expects an integer, got '{}'", key, v)))
        }
        fn real(key: &str, v: &str) -> Result<f64> {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("{} expects a number, got '{}'", key, v)))
        }
        match key {
            "word_dim" => self.word_dim = int(key, value)?,
            "upos_dim" => self.upos_dim = int(key, value)?,
            "lstm_dim" => self.lstm_dim = int(key, value)?,
            "lstm_layers" => self.lstm_layers = int(key, value)?,
            "arc_mlp_dim" => self.arc_mlp_dim = int(key, value)?,
            "label_mlp_dim" => self.label_mlp_dim = int(key, value)?,
            "mlp_layers" => self.mlp_layers = int(key, value)?,
            "emb_dropout" => self.emb_dropout = real(key, value)?,
            "dropout" => self.dropout = real(key, value)?,
            "label_count" => self.label_count = int(key, value)?,
            "word_vocab_size" => self.word_vocab_size = int(key, value)?,
            "upos_vocab_size" => self.upos_vocab_size = int(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// `key = value` lines in a fixed order. Reals use the shortest
    /// representation that parses back to the same value.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (k, v) in [
            ("word_dim", self.word_dim.to_string()),
            ("upos_dim", self.upos_dim.to_string()),
            ("lstm_dim", self.lstm_dim.to_string()),
            ("lstm_layers", self.lstm_layers.to_string()),
            ("arc_mlp_dim", self.arc_mlp_dim.to_string()),
            ("label_mlp_dim", self.label_mlp_dim.to_string()),
            ("mlp_layers", self.mlp_layers.to_string()),
            ("emb_dropout", format!("{:?}", self.emb_dropout)),
            ("dropout", format!("{:?}", self.dropout)),
            ("label_count", self.label_count.to_string()),
            ("word_vocab_size", self.word_vocab_size.to_string()),
            ("upos_vocab_size", self.upos_vocab_size.to_string()),
        ] {
            writeln!(out, "{} = {}", k, v).unwrap();
        }
        out
    }

    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut config = ModelConfig::full(1, 1, 1);
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key = value, got '{}'", line)))?;
            if !config.set(k.trim(), v)? {
                return Err(Error::Config(format!("unknown model key '{}'", k.trim())));
            }
        }
        config.validate()?;
        Ok(config)
    }
}
