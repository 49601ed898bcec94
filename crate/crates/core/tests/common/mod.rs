//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use depdistill::autodiff::{Graph, ParamSet, Tensor, Var};
use depdistill::conllu::{check_tree, Sentence};
use depdistill::model::ModelConfig;
use depdistill::Result;
use rand::Rng;

pub const FD_STEP: f64 = 1e-5;

/// Largest relative error between reverse-mode gradients and central
/// differences, over every element of every parameter.
pub fn max_gradient_error<F>(params: &ParamSet, loss: F) -> Result<f64>
where
    F: Fn(&mut Graph, &ParamSet) -> Result<Var>,
{
    let mut g = Graph::new();
    let out = loss(&mut g, params)?;
    let grads = g.backward(&out, params)?;
    let eval = |p: &ParamSet| -> Result<f64> {
        let mut g = Graph::no_grad();
        Ok(loss(&mut g, p)?.value().item())
    };
    let mut worst = 0.0f64;
    let mut probe = params.clone();
    for id in params.ids() {
        for k in 0..params.get(id).len() {
            let orig = params.get(id).data()[k];
            probe.get_mut(id).data_mut()[k] = orig + FD_STEP;
            let up = eval(&probe)?;
            probe.get_mut(id).data_mut()[k] = orig - FD_STEP;
            let down = eval(&probe)?;
            probe.get_mut(id).data_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let analytic = grads.get(id).data()[k];
            let scale = analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic - numeric).abs() / scale);
        }
    }
    Ok(worst)
}

pub fn random_tensor<R: Rng>(rng: &mut R, shape: &[usize]) -> Tensor {
    let mut t = Tensor::zeros(shape);
    t.data_mut().iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    t
}

/// Best tree score by enumerating every head assignment.
pub fn brute_force_best(scores: &Tensor, single_root: bool) -> f64 {
    let n = scores.rows();
    let mut heads = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        let ok = heads.iter().enumerate().all(|(d, &h)| h != d + 1)
            && (!single_root || heads.iter().filter(|&&h| h == 0).count() == 1)
            && check_tree(&heads).is_ok();
        if ok {
            let s: f64 = heads.iter().enumerate().map(|(d, &h)| scores.get2(d, h)).sum();
            best = best.max(s);
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            heads[i] += 1;
            if heads[i] <= n {
                break;
            }
            heads[i] = 0;
            i += 1;
        }
    }
}

/// Attachment scores recomputed one token at a time.
pub fn rescore(gold: &[Sentence], predicted: &[Sentence], include_punct: bool) -> (f64, f64) {
    let (mut total, mut heads, mut both) = (0usize, 0usize, 0usize);
    for (g, p) in gold.iter().zip(predicted) {
        for i in 0..g.len() {
            if !include_punct && g.upos[i] == "PUNCT" {
                continue;
            }
            total += 1;
            if g.heads[i] == p.heads[i] {
                heads += 1;
                if g.labels[i] == p.labels[i] {
                    both += 1;
                }
            }
        }
    }
    (100.0 * heads as f64 / total as f64, 100.0 * both as f64 / total as f64)
}

/// A uniformly shuffled random tree: each token after the first in a random
/// order attaches to an earlier one.
pub fn random_heads<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut heads = vec![0; n];
    for k in 1..n {
        heads[order[k] - 1] = order[rng.gen_range(0..k)];
    }
    heads
}

pub fn random_sentence<R: Rng>(rng: &mut R, n: usize) -> Sentence {
    const UPOS: [&str; 4] = ["NOUN", "VERB", "ADJ", "PUNCT"];
    const LABELS: [&str; 3] = ["nsubj", "obj", "amod"];
    let heads = random_heads(rng, n);
    let labels = heads
        .iter()
        .map(|&h| if h == 0 { "root".to_string() } else { LABELS[rng.gen_range(0..3)].to_string() })
        .collect();
    Sentence::new(
        (0..n).map(|i| format!("w{}", rng.gen_range(0..5) + i % 2)).collect(),
        (0..n).map(|_| UPOS[rng.gen_range(0..4)].to_string()).collect(),
        heads,
        labels,
    )
    .unwrap()
}

/// A small network with every component of the full architecture.
pub fn tiny_config() -> ModelConfig {
    let mut c = ModelConfig::full(1, 1, 1);
    c.word_dim = 3;
    c.upos_dim = 2;
    c.lstm_dim = 4;
    c.lstm_layers = 2;
    c.arc_mlp_dim = 3;
    c.label_mlp_dim = 2;
    c
}

pub type LossFn = Box<dyn Fn(&mut Graph, &ParamSet) -> Result<Var>>;

/// `Σ out ⊙ R` for a fixed random `R`, so every output element matters.
fn weighted_sum(g: &mut Graph, out: &Var, seed: u64) -> Result<Var> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let w = g.constant(random_tensor(&mut rng, out.shape()));
    let prod = g.mul(out, &w)?;
    Ok(g.sum(&prod))
}

/// One gradient-check case per differentiable operation.
pub fn op_cases() -> Vec<(&'static str, ParamSet, LossFn)> {
    use depdistill::autodiff::{lstm_cell, lstm_step, LstmWeights, ParamId};
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut set = |shapes: &[&[usize]]| {
        let mut p = ParamSet::new();
        for (i, s) in shapes.iter().enumerate() {
            p.push(format!("p{}", i), random_tensor(&mut rng, s));
        }
        p
    };
    let ids = |g: &mut Graph, p: &ParamSet| -> Vec<Var> { p.ids().map(|id| g.param(p, id)).collect() };
    let mut cases: Vec<(&'static str, ParamSet, LossFn)> = Vec::new();

    cases.push(("matmul", set(&[&[3, 4], &[4, 2]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.matmul(&v[0], &v[1])?;
        weighted_sum(g, &o, 1)
    })));
    cases.push(("matmul_nt", set(&[&[3, 4], &[5, 4]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.matmul_nt(&v[0], &v[1])?;
        weighted_sum(g, &o, 2)
    })));
    cases.push(("add", set(&[&[3, 4], &[3, 4]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.add(&v[0], &v[1])?;
        weighted_sum(g, &o, 3)
    })));
    cases.push(("add_row", set(&[&[3, 4], &[4]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.add_row(&v[0], &v[1])?;
        weighted_sum(g, &o, 4)
    })));
    cases.push(("mul", set(&[&[3, 4], &[3, 4]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.mul(&v[0], &v[1])?;
        weighted_sum(g, &o, 5)
    })));
    cases.push(("scale", set(&[&[2, 3]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.scale(&v[0], -1.7);
        weighted_sum(g, &o, 6)
    })));
    cases.push(("sigmoid", set(&[&[2, 3]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.sigmoid(&v[0]);
        weighted_sum(g, &o, 7)
    })));
    cases.push(("tanh", set(&[&[2, 3]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.tanh(&v[0]);
        weighted_sum(g, &o, 8)
    })));
    cases.push(("relu", set(&[&[3, 3]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.relu(&v[0]);
        weighted_sum(g, &o, 9)
    })));
    cases.push(("concat_cols", set(&[&[2, 3], &[2, 1]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.concat_cols(&v)?;
        weighted_sum(g, &o, 10)
    })));
    cases.push(("slice_cols", set(&[&[2, 5]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.slice_cols(&v[0], 1, 3)?;
        weighted_sum(g, &o, 11)
    })));
    cases.push(("concat_rows", set(&[&[2, 3], &[1, 3]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.concat_rows(&v)?;
        weighted_sum(g, &o, 12)
    })));
    cases.push(("slice_rows", set(&[&[4, 2]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.slice_rows(&v[0], 1, 2)?;
        weighted_sum(g, &o, 13)
    })));
    cases.push(("gather_rows", set(&[&[3, 2]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.gather_rows(&v[0], &[2, 0, 2, 1, 2])?;
        weighted_sum(g, &o, 14)
    })));
    cases.push(("log_softmax_rows", set(&[&[3, 4]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.log_softmax_rows(&v[0])?;
        weighted_sum(g, &o, 15)
    })));
    cases.push(("pick_sum", set(&[&[3, 4]]), Box::new(move |g, p| {
        let v = ids(g, p);
        g.pick_sum(&v[0], &[Some(3), None, Some(0)])
    })));
    cases.push(("sum", set(&[&[2, 2]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let sq = g.mul(&v[0], &v[0])?;
        Ok(g.sum(&sq))
    })));
    cases.push(("kl_rows", set(&[&[3, 4]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let target = Tensor::from_rows(&[
            vec![0.1, 0.2, 0.3, 0.4],
            vec![0.0, 0.5, 0.5, 0.0],
            vec![0.25; 4],
        ])?;
        let lq = g.log_softmax_rows(&v[0])?;
        g.kl_rows(&target, &lq, &[true, true, false])
    })));
    cases.push(("row_group_dot", set(&[&[3, 6], &[3, 2]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let o = g.row_group_dot(&v[0], &v[1])?;
        weighted_sum(g, &o, 16)
    })));
    cases.push(("lstm_step", set(&[&[2, 12], &[2, 3], &[2, 3], &[3, 12]]), Box::new(move |g, p| {
        let v = ids(g, p);
        let (h, c) = lstm_step(g, &v[0], &v[1], &v[2], &v[3])?;
        let both = g.concat_cols(&[h, c])?;
        weighted_sum(g, &both, 17)
    })));
    cases.push(("lstm_cell_unrolled", set(&[&[3, 2], &[2, 8], &[2, 8], &[8]]), Box::new(move |g, p| {
        let x = g.param(p, ParamId(0));
        let w = LstmWeights {
            wx: g.param(p, ParamId(1)),
            wh: g.param(p, ParamId(2)),
            b: g.param(p, ParamId(3)),
        };
        let mut h = g.constant(Tensor::zeros(&[1, 2]));
        let mut c = g.constant(Tensor::zeros(&[1, 2]));
        for t in 0..3 {
            let xt = g.slice_rows(&x, t, 1)?;
            (h, c) = lstm_cell(g, &xt, &h, &c, &w)?;
        }
        weighted_sum(g, &h, 18)
    })));
    cases
}
