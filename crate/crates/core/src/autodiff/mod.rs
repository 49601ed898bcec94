//! Dense tensors, a reverse-mode differentiation tape, LSTM cells and Adam.

mod adam;
mod graph;
mod lstm;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use graph::{Gradients, Graph, ParamId, ParamSet, Var};
pub use lstm::{lstm_cell, lstm_step, LstmWeights};
pub use tensor::{log_softmax, matmul, matmul_nt, softmax, Tensor};
