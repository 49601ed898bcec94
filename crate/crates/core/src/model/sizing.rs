use super::config::ModelConfig;
use super::params::count_params;
use crate::error::{Error, Result};

const TOLERANCE: f64 = 0.01;

/// `full` with its five width dimensions multiplied by `alpha` and rounded.
/// `lstm_dim` stays even and every width stays at least 2.
pub fn scale_config(full: &ModelConfig, alpha: f64) -> ModelConfig {
    let scale = |d: usize| ((d as f64 * alpha).round() as usize).max(2);
    let mut c = full.clone();
    c.word_dim = scale(full.word_dim);
    c.upos_dim = scale(full.upos_dim);
    c.lstm_dim = (2 * ((full.lstm_dim as f64 * alpha / 2.0).round() as usize)).max(2);
    c.arc_mlp_dim = scale(full.arc_mlp_dim);
    c.label_mlp_dim = scale(full.label_mlp_dim);
    c
}

/// Achieved parameter fraction of `student` relative to `full`.
pub fn param_fraction(student: &ModelConfig, full: &ModelConfig) -> f64 {
    count_params(student) as f64 / count_params(full) as f64
}

/// Shrinks `full` by a common width factor so that the student has
/// `target_fraction` of its parameters, within one percentage point.
pub fn size_student(full: &ModelConfig, target_fraction: f64) -> Result<ModelConfig> {
    if !(target_fraction > 0.0 && target_fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "target fraction must be in (0, 1], got {}",
            target_fraction
        )));
    }
    full.validate()?;
    if target_fraction == 1.0 {
        return Ok(full.clone());
    }
    let fraction = |alpha: f64| param_fraction(&scale_config(full, alpha), full);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fraction(mid) < target_fraction {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = [lo, hi]
        .into_iter()
        .map(|a| (a, fraction(a)))
        .min_by(|x, y| (x.1 - target_fraction).abs().total_cmp(&(y.1 - target_fraction).abs()))
        .unwrap();
    if (best.1 - target_fraction).abs() > TOLERANCE {
        return Err(Error::Sizing {
            target: target_fraction,
            closest: best.1,
        });
    }
    Ok(scale_config(full, best.0))
}
