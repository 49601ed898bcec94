use super::graph::{Gradients, ParamSet};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Adam settings with an exponentially annealed learning rate
/// `lr(t) = lr₀ · anneal_base^(t / anneal_steps)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub anneal_base: f64,
    pub anneal_steps: f64,
}

impl AdamConfig {
    pub fn annealing_factor(&self, step: u64) -> f64 {
        self.anneal_base.powf(step as f64 / self.anneal_steps)
    }

    pub fn learning_rate_at(&self, step: u64) -> f64 {
        self.learning_rate * self.annealing_factor(step)
    }
}

/// First/second moment accumulators for every parameter of a set.
#[derive(Clone, Debug)]
pub struct AdamState {
    first: Vec<Tensor>,
    second: Vec<Tensor>,
    step: u64,
}

impl AdamState {
    pub fn new(params: &ParamSet) -> Self {
        let zeros: Vec<Tensor> = params
            .iter()
            .map(|(_, t)| Tensor::zeros(t.shape()))
            .collect();
        AdamState {
            first: zeros.clone(),
            second: zeros,
            step: 0,
        }
    }

    /// Number of updates applied so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self, index: usize) -> &Tensor {
        &self.first[index]
    }

    pub fn second_moment(&self, index: usize) -> &Tensor {
        &self.second[index]
    }

    /// Applies one bias-corrected Adam update to every parameter. The
    /// learning rate is annealed on the number of updates already taken.
    pub fn update(&mut self, params: &mut ParamSet, grads: &Gradients, config: &AdamConfig) -> Result<()> {
        if !grads.is_finite() {
            return Err(Error::Training {
                step: self.step,
                message: "non-finite gradient".to_string(),
            });
        }
        let lr = config.learning_rate_at(self.step);
        self.step += 1;
        let t = self.step as f64;
        let correction1 = 1.0 - config.beta1.powf(t);
        let correction2 = 1.0 - config.beta2.powf(t);

        for (id, grad) in grads.iter() {
            let (m, v) = (&mut self.first[id.0], &mut self.second[id.0]);
            if m.len() != grad.len() {
                return Err(Error::contract(format!(
                    "gradient for {} has {} values, parameter has {}",
                    params.name(id),
                    grad.len(),
                    m.len()
                )));
            }
            let p = params.get_mut(id);
            for (((pv, mv), vv), gv) in p
                .data_mut()
                .iter_mut()
                .zip(m.data_mut())
                .zip(v.data_mut())
                .zip(grad.data())
            {
                *mv = config.beta1 * *mv + (1.0 - config.beta1) * gv;
                *vv = config.beta2 * *vv + (1.0 - config.beta2) * gv * gv;
                let m_hat = *mv / correction1;
                let v_hat = *vv / correction2;
                *pv -= lr * m_hat / (v_hat.sqrt() + config.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Graph;

    fn config() -> AdamConfig {
        AdamConfig {
            learning_rate: 2e-3,
            beta1: 0.9,
            beta2: 0.9,
            epsilon: 1e-12,
            anneal_base: 0.75,
            anneal_steps: 5000.0,
        }
    }

    fn zero_grads(params: &ParamSet) -> Gradients {
        let mut g = Graph::new();
        let c = g.constant(Tensor::scalar(0.0));
        g.backward(&c, params).unwrap()
    }

    #[test]
    fn annealing_schedule() {
        let c = config();
        assert_eq!(c.annealing_factor(0), 1.0);
        assert_eq!(c.annealing_factor(5000), 0.75);
        assert_eq!(c.learning_rate_at(10000) / c.learning_rate_at(0), 0.75f64.powf(2.0));
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut params = ParamSet::new();
        params.push("w", Tensor::row_vector(vec![0.1, -0.2, 0.3]));
        let before = params.clone();
        let mut state = AdamState::new(&params);
        let grads = zero_grads(&params);
        state.update(&mut params, &grads, &config()).unwrap();
        assert_eq!(params, before);
        assert_eq!(state.step(), 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut params = ParamSet::new();
        let id = params.push("w", Tensor::row_vector(vec![1.0]));
        let mut g = Graph::new();
        let w = g.param(&params, id);
        let loss = g.sum(&w);
        let grads = g.backward(&loss, &params).unwrap();
        drop(g);
        let mut state = AdamState::new(&params);
        state.update(&mut params, &grads, &config()).unwrap();
        // Bias-corrected first step is lr · g/|g|.
        assert!((params.get(id).item() - (1.0 - 2e-3)).abs() < 1e-12);
        assert_eq!(state.first_moment(0).shape(), params.get(id).shape());
    }

    #[test]
    fn non_finite_gradient_reports_step() {
        let mut params = ParamSet::new();
        let id = params.push("w", Tensor::row_vector(vec![f64::INFINITY]));
        let mut g = Graph::new();
        let w = g.param(&params, id);
        let sq = g.mul(&w, &w).unwrap();
        let loss = g.sum(&sq);
        let grads = g.backward(&loss, &params).unwrap();
        drop(g);
        let mut state = AdamState::new(&params);
        assert!(matches!(
            state.update(&mut params, &grads, &config()),
            Err(Error::Training { step: 0, .. })
        ));
    }
}
