use rand::Rng;

use super::config::ModelConfig;
use crate::autodiff::{ParamId, ParamSet, Tensor};
use crate::conllu::PAD;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinearIds {
    pub weight: ParamId,
    pub bias: ParamId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LstmIds {
    pub wx: ParamId,
    pub wh: ParamId,
    pub b: ParamId,
}

/// Where each tensor of the network lives in the parameter set. The order
/// is fixed by the config, so the layout can be recomputed after loading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamLayout {
    pub word_emb: ParamId,
    pub upos_emb: ParamId,
    /// Per layer: forward, backward.
    pub lstm: Vec<[LstmIds; 2]>,
    pub arc_dep: Vec<LinearIds>,
    pub arc_head: Vec<LinearIds>,
    pub label_dep: Vec<LinearIds>,
    pub label_head: Vec<LinearIds>,
    /// `arc_mlp_dim × arc_mlp_dim`
    pub arc_bilinear: ParamId,
    /// `1 × arc_mlp_dim`, the head-only term of the arc scorer.
    pub arc_head_bias: ParamId,
    /// `label_mlp_dim × (label_count · label_mlp_dim)`: one bilinear matrix
    /// per label, side by side.
    pub label_bilinear: ParamId,
    /// `2·label_mlp_dim × label_count`: dependent rows, then head rows.
    pub label_linear: ParamId,
    pub label_bias: ParamId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Init {
    Embedding,
    Weight,
    Zero,
}

struct Spec {
    name: String,
    shape: Vec<usize>,
    init: Init,
}

fn specs(config: &ModelConfig) -> (ParamLayout, Vec<Spec>) {
    let mut specs = Vec::new();
    let mut push = |name: String, shape: Vec<usize>, init: Init| {
        specs.push(Spec { name, shape, init });
        ParamId(specs.len() - 1)
    };

    let word_emb = push("word_emb".into(), vec![config.word_vocab_size, config.word_dim], Init::Embedding);
    let upos_emb = push("upos_emb".into(), vec![config.upos_vocab_size, config.upos_dim], Init::Embedding);

    let hidden = config.lstm_hidden();
    let mut lstm = Vec::new();
    for layer in 0..config.lstm_layers {
        let input = if layer == 0 {
            config.word_dim + config.upos_dim
        } else {
            config.lstm_dim
        };
        let mut dir = |d: &str| LstmIds {
            wx: push(format!("lstm.{}.{}.wx", layer, d), vec![input, 4 * hidden], Init::Weight),
            wh: push(format!("lstm.{}.{}.wh", layer, d), vec![hidden, 4 * hidden], Init::Weight),
            b: push(format!("lstm.{}.{}.b", layer, d), vec![4 * hidden], Init::Zero),
        };
        let fwd = dir("fwd");
        let bwd = dir("bwd");
        lstm.push([fwd, bwd]);
    }

    let mut mlp = |prefix: &str, out: usize| {
        (0..config.mlp_layers)
            .map(|k| {
                let input = if k == 0 { config.lstm_dim } else { out };
                LinearIds {
                    weight: push(format!("{}.{}.w", prefix, k), vec![input, out], Init::Weight),
                    bias: push(format!("{}.{}.b", prefix, k), vec![out], Init::Zero),
                }
            })
            .collect::<Vec<_>>()
    };
    let arc_dep = mlp("arc_dep", config.arc_mlp_dim);
    let arc_head = mlp("arc_head", config.arc_mlp_dim);
    let label_dep = mlp("label_dep", config.label_mlp_dim);
    let label_head = mlp("label_head", config.label_mlp_dim);

    let (da, dl, l) = (config.arc_mlp_dim, config.label_mlp_dim, config.label_count);
    let arc_bilinear = push("arc_bilinear".into(), vec![da, da], Init::Weight);
    let arc_head_bias = push("arc_head_bias".into(), vec![1, da], Init::Weight);
    let label_bilinear = push("label_bilinear".into(), vec![dl, l * dl], Init::Weight);
    let label_linear = push("label_linear".into(), vec![2 * dl, l], Init::Weight);
    let label_bias = push("label_bias".into(), vec![l], Init::Zero);

    let layout = ParamLayout {
        word_emb,
        upos_emb,
        lstm,
        arc_dep,
        arc_head,
        label_dep,
        label_head,
        arc_bilinear,
        arc_head_bias,
        label_bilinear,
        label_linear,
        label_bias,
    };
    (layout, specs)
}

impl ParamLayout {
    pub fn new(config: &ModelConfig) -> Self {
        specs(config).0
    }
}

/// Names and shapes of all tensors, in layout order.
pub fn param_shapes(config: &ModelConfig) -> Vec<(String, Vec<usize>)> {
    specs(config).1.into_iter().map(|s| (s.name, s.shape)).collect()
}

/// Number of trainable scalars for a configuration.
pub fn count_params(config: &ModelConfig) -> usize {
    specs(config)
        .1
        .iter()
        .map(|s| s.shape.iter().product::<usize>())
        .sum()
}

/// Fresh parameters: weights uniform in ±1/√fan-in (fan-in is the number
/// of rows), embeddings uniform in ±1/√dim with a zero padding row, biases
/// zero.
pub fn init_params<R: Rng>(config: &ModelConfig, rng: &mut R) -> (ParamLayout, ParamSet) {
    let (layout, specs) = specs(config);
    let mut set = ParamSet::new();
    for spec in specs {
        let mut t = Tensor::zeros(&spec.shape);
        match spec.init {
            Init::Zero => {}
            Init::Weight | Init::Embedding => {
                let fan = if spec.init == Init::Weight {
                    spec.shape[0]
                } else {
                    spec.shape[1]
                };
                let bound = 1.0 / (fan as f64).sqrt();
                t.data_mut()
                    .iter_mut()
                    .for_each(|v| *v = rng.gen_range(-bound..=bound));
                if spec.init == Init::Embedding {
                    t.row_mut(PAD).iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }
        set.push(spec.name, t);
    }
    (layout, set)
}
