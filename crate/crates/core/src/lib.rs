//! Biaffine graph-based dependency parsing with teacher-student
//! distillation.
//!
//! The crate is organised bottom-up:
//!
//! * [`autodiff`]: tensors, reverse-mode differentiation, LSTM cell, Adam.
//! * [`conllu`]: CoNLL-U reading/writing, vocabularies, embeddings and
//!   treebank statistics.
//! * [`model`]: the biaffine network, parameter counting, student sizing
//!   and the model file format.
//! * [`decode`]: Chu-Liu/Edmonds and greedy tree decoding.
//! * [`training`]: losses, baseline training and distillation.
//! * [`eval`] and [`bench`]: attachment scores and throughput measurement.
//! * [`synthetic`]: a seeded toy grammar for desk-scale experiments.

pub mod autodiff;
pub mod bench;
pub mod conllu;
pub mod decode;
mod error;
pub mod eval;
pub mod model;
pub mod synthetic;
pub mod training;

pub use error::{Error, Result};
