//! Baseline training and teacher-student distillation.
//!
//! The distillation objective per batch is
//! `KL(T_h ‖ S_h) + KL(T_lab ‖ S_lab) + CE(h) + CE(lab)` with the standard,
//! nonnegative KL divergence. Label distributions are taken at the gold
//! head. The optimiser minimises the per-token mean.

mod hyper;
mod loss;
mod trainer;

pub use crate::model::Batch;
pub use hyper::{RunConfig, TrainingHyper};
pub use loss::{ce_loss, distill_loss, kl_loss, parser_loss, teacher_distributions, BatchLoss, DistillationTargets, Loss};
pub use trainer::{
    evaluate, init_parser, student_from, train_baseline, train_distilled, train_parser, write_history_csv, Control,
    EpochRecord, Observer, TrainOutcome,
};
