use rand::{Rng, RngCore};

use super::batch::Batch;
use super::config::ModelConfig;
use super::params::{init_params, LinearIds, ParamLayout};
use crate::autodiff::{lstm_step, Graph, ParamSet, Tensor, Var};
use crate::conllu::{Sentence, Vocab};
use crate::decode::{argmax, chu_liu_edmonds, tree_score, DecodedTree};
use crate::error::{Error, Result};

/// Biaffine arc scores `s[i, j] = dep_i · U · head_j + u · head_j`.
/// `dep` is n×d, `head` is m×d, `u` is 1×d; the result is n×m.
pub(crate) fn biaffine_arcs(g: &mut Graph, dep: &Var, head: &Var, weight: &Var, head_bias: &Var) -> Result<Var> {
    let du = g.matmul(dep, weight)?;
    let scores = g.matmul_nt(&du, head)?;
    let bias = g.matmul_nt(head, head_bias)?;
    g.add_row(&scores, &bias)
}

/// Label scores for aligned rows of dependent and head vectors:
/// `s[r, l] = dep_r · U_l · head_r + W · [dep_r; head_r] + b_l`.
pub(crate) fn biaffine_labels(
    g: &mut Graph,
    dep: &Var,
    head: &Var,
    bilinear: &Var,
    linear: &Var,
    bias: &Var,
) -> Result<Var> {
    let projected = g.matmul(dep, bilinear)?;
    let bil = g.row_group_dot(&projected, head)?;
    let both = g.concat_cols(&[dep.clone(), head.clone()])?;
    let lin = g.matmul(&both, linear)?;
    let sum = g.add(&bil, &lin)?;
    g.add_row(&sum, bias)
}

/// MLP outputs for every real position of a batch, in packed order (see
/// [`Batch`]): sentence after sentence, ROOT first.
pub struct Features {
    /// Encoder outputs in packed order.
    pub context: Var,
    pub arc_dep: Var,
    pub arc_head: Var,
    pub label_dep: Var,
    pub label_head: Var,
    offsets: Vec<usize>,
    lengths: Vec<usize>,
}

impl Features {
    /// Packed row of position `t` (0 = ROOT) of sentence `b`.
    pub fn row(&self, b: usize, t: usize) -> usize {
        self.offsets[b] + t
    }
}

/// Scores of a batch evaluated without recording gradients.
#[derive(Clone, Debug)]
pub struct ScoreBundle {
    /// Encoder output per sentence, `(n+1) × lstm_dim`, ROOT first.
    pub context: Vec<Tensor>,
    /// Per sentence `n × (n+1)`; column 0 is ROOT.
    pub arc_scores: Vec<Tensor>,
    /// Per sentence `n × (n+1) × L`.
    pub label_scores: Vec<Tensor>,
}

impl ScoreBundle {
    /// Arc scores stacked to `B × max_n × (max_n + 1)`. Columns beyond a
    /// sentence's length are `-inf`; padded rows are all `-inf` except
    /// column 0.
    pub fn padded_arc_scores(&self) -> Tensor {
        let max_n = self.arc_scores.iter().map(Tensor::rows).max().unwrap_or(0);
        let b = self.arc_scores.len();
        let mut out = Tensor::filled(&[b, max_n, max_n + 1], f64::NEG_INFINITY);
        let data = out.data_mut();
        for (k, s) in self.arc_scores.iter().enumerate() {
            for i in 0..max_n {
                let base = (k * max_n + i) * (max_n + 1);
                if i < s.rows() {
                    data[base..base + s.cols()].copy_from_slice(s.row(i));
                } else {
                    data[base] = 0.0;
                }
            }
        }
        out
    }
}

fn dropout_mask(rng: &mut dyn RngCore, rows: usize, cols: usize, rate: f64) -> Tensor {
    let keep = 1.0 / (1.0 - rate);
    let data = (0..rows * cols)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect();
    Tensor::new(vec![rows, cols], data).expect("mask shape")
}

fn reborrow<'a>(rng: &'a mut Option<&mut dyn RngCore>) -> Option<&'a mut dyn RngCore> {
    match rng {
        Some(r) => Some(&mut **r),
        None => None,
    }
}

/// A biaffine parser: configuration, vocabulary and weights.
#[derive(Clone, Debug)]
pub struct Parser {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub params: ParamSet,
    pub layout: ParamLayout,
}

impl Parser {
    /// A freshly initialised parser whose vocabulary sizes come from `vocab`.
    pub fn new<R: Rng>(mut config: ModelConfig, vocab: Vocab, rng: &mut R) -> Result<Self> {
        config.word_vocab_size = vocab.word_count();
        config.upos_vocab_size = vocab.upos_count();
        config.label_count = vocab.label_count();
        config.validate()?;
        let (layout, params) = init_params(&config, rng);
        Ok(Parser {
            config,
            vocab,
            params,
            layout,
        })
    }

    /// Assembles a parser from parts, checking that tensors match the
    /// configuration.
    pub fn from_parts(config: ModelConfig, vocab: Vocab, params: ParamSet) -> Result<Self> {
        config.validate()?;
        if config.word_vocab_size != vocab.word_count()
            || config.upos_vocab_size != vocab.upos_count()
            || config.label_count != vocab.label_count()
        {
            return Err(Error::Config("vocabulary sizes disagree with the model config".into()));
        }
        let shapes = super::params::param_shapes(&config);
        if shapes.len() != params.len() {
            return Err(Error::Config(format!(
                "expected {} tensors, found {}",
                shapes.len(),
                params.len()
            )));
        }
        for ((name, shape), (pname, t)) in shapes.iter().zip(params.iter()) {
            if name != pname || shape.as_slice() != t.shape() {
                return Err(Error::Config(format!(
                    "tensor '{}' {:?} does not match expected '{}' {:?}",
                    pname,
                    t.shape(),
                    name,
                    shape
                )));
            }
        }
        let layout = ParamLayout::new(&config);
        Ok(Parser {
            config,
            vocab,
            params,
            layout,
        })
    }

    /// Replaces word embedding rows with pretrained vectors when the
    /// dimensions agree. Returns whether they were attached.
    pub fn attach_embeddings(&mut self, matrix: &Tensor) -> bool {
        let emb = self.params.get_mut(self.layout.word_emb);
        if emb.shape() != matrix.shape() {
            return false;
        }
        *emb = matrix.clone();
        true
    }

    pub fn param_count(&self) -> usize {
        self.params.element_count()
    }

    fn apply_dropout(&self, g: &mut Graph, x: Var, rate: f64, rng: &mut Option<&mut dyn RngCore>) -> Result<Var> {
        match rng {
            Some(r) if rate > 0.0 => {
                let t = x.value();
                let mask = g.constant(dropout_mask(&mut **r, t.rows(), t.cols(), rate));
                g.mul(&x, &mask)
            }
            _ => Ok(x),
        }
    }

    /// Runs one LSTM direction over time-major rows.
    fn run_direction(
        &self,
        g: &mut Graph,
        input: &Var,
        ids: &super::params::LstmIds,
        batch: usize,
        steps: usize,
    ) -> Result<Var> {
        let wx = g.param(&self.params, ids.wx);
        let wh = g.param(&self.params, ids.wh);
        let b = g.param(&self.params, ids.b);
        let hidden = wh.value().rows();
        let projected = g.matmul(input, &wx)?;
        let projected = g.add_row(&projected, &b)?;
        let mut h = g.constant(Tensor::zeros(&[batch, hidden]));
        let mut c = g.constant(Tensor::zeros(&[batch, hidden]));
        let mut outputs = Vec::with_capacity(steps);
        for t in 0..steps {
            let p = g.slice_rows(&projected, t * batch, batch)?;
            let (h2, c2) = lstm_step(g, &p, &h, &c, &wh)?;
            outputs.push(h2.clone());
            h = h2;
            c = c2;
        }
        g.concat_rows(&outputs)
    }

    /// Encoder output for every time-major row, `(steps · B) × lstm_dim`.
    /// Dropout is applied when `rng` is given.
    pub fn encode(&self, g: &mut Graph, batch: &Batch, mut rng: Option<&mut dyn RngCore>) -> Result<Var> {
        let words = g.param(&self.params, self.layout.word_emb);
        let tags = g.param(&self.params, self.layout.upos_emb);
        let w = g.gather_rows(&words, &batch.word_ids)?;
        let u = g.gather_rows(&tags, &batch.upos_ids)?;
        let mut x = g.concat_cols(&[w, u])?;
        x = self.apply_dropout(g, x, self.config.emb_dropout, &mut rng)?;
        let reversal = batch.reversal();
        for layer in &self.layout.lstm {
            let fwd = self.run_direction(g, &x, &layer[0], batch.size(), batch.steps)?;
            let rev = g.gather_rows(&x, &reversal)?;
            let bwd = self.run_direction(g, &rev, &layer[1], batch.size(), batch.steps)?;
            let bwd = g.gather_rows(&bwd, &reversal)?;
            x = g.concat_cols(&[fwd, bwd])?;
            x = self.apply_dropout(g, x, self.config.dropout, &mut rng)?;
        }
        Ok(x)
    }

    fn mlp(&self, g: &mut Graph, x: &Var, layers: &[LinearIds], rng: &mut Option<&mut dyn RngCore>) -> Result<Var> {
        let mut h = x.clone();
        for l in layers {
            let w = g.param(&self.params, l.weight);
            let b = g.param(&self.params, l.bias);
            let z = g.matmul(&h, &w)?;
            let z = g.add_row(&z, &b)?;
            h = g.relu(&z);
            h = self.apply_dropout(g, h, self.config.dropout, rng)?;
        }
        Ok(h)
    }

    /// Encoder plus the four MLPs, over real positions only.
    pub fn features(&self, g: &mut Graph, batch: &Batch, mut rng: Option<&mut dyn RngCore>) -> Result<Features> {
        let encoded = self.encode(g, batch, reborrow(&mut rng))?;
        let context = g.gather_rows(&encoded, &batch.packed_rows())?;
        let arc_dep = self.mlp(g, &context, &self.layout.arc_dep, &mut rng)?;
        let arc_head = self.mlp(g, &context, &self.layout.arc_head, &mut rng)?;
        let label_dep = self.mlp(g, &context, &self.layout.label_dep, &mut rng)?;
        let label_head = self.mlp(g, &context, &self.layout.label_head, &mut rng)?;
        Ok(Features {
            context,
            arc_dep,
            arc_head,
            label_dep,
            label_head,
            offsets: batch.packed_offsets(),
            lengths: batch.lengths.clone(),
        })
    }

    /// One `n × (n+1)` arc score matrix per sentence.
    pub fn score_arcs(&self, g: &mut Graph, f: &Features) -> Result<Vec<Var>> {
        let weight = g.param(&self.params, self.layout.arc_bilinear);
        let head_bias = g.param(&self.params, self.layout.arc_head_bias);
        let mut out = Vec::with_capacity(f.lengths.len());
        for (b, &n) in f.lengths.iter().enumerate() {
            let dep = g.slice_rows(&f.arc_dep, f.row(b, 1), n)?;
            let head = g.slice_rows(&f.arc_head, f.row(b, 0), n + 1)?;
            out.push(biaffine_arcs(g, &dep, &head, &weight, &head_bias)?);
        }
        Ok(out)
    }

    /// Label scores for (dependent, head) position pairs of sentence `b`,
    /// one row per pair.
    fn score_label_pairs(&self, g: &mut Graph, f: &Features, pairs: &[(usize, usize, usize)]) -> Result<Var> {
        let mut dep_rows = Vec::with_capacity(pairs.len());
        let mut head_rows = Vec::with_capacity(pairs.len());
        for &(b, i, h) in pairs {
            let n = f.lengths[b];
            if h > n || i == 0 || i > n {
                return Err(Error::contract(format!(
                    "label pair ({}, {}) out of range for sentence of {} tokens",
                    i, h, n
                )));
            }
            dep_rows.push(f.row(b, i));
            head_rows.push(f.row(b, h));
        }
        let dep = g.gather_rows(&f.label_dep, &dep_rows)?;
        let head = g.gather_rows(&f.label_head, &head_rows)?;
        let bilinear = g.param(&self.params, self.layout.label_bilinear);
        let linear = g.param(&self.params, self.layout.label_linear);
        let bias = g.param(&self.params, self.layout.label_bias);
        biaffine_labels(g, &dep, &head, &bilinear, &linear, &bias)
    }

    /// `N × L` label scores of every token at the given head, sentences in
    /// batch order.
    pub fn score_labels(&self, g: &mut Graph, f: &Features, heads: &[Vec<usize>]) -> Result<Var> {
        if heads.len() != f.lengths.len() {
            return Err(Error::contract("one head list per sentence expected"));
        }
        let mut pairs = Vec::new();
        for (b, hs) in heads.iter().enumerate() {
            if hs.len() != f.lengths[b] {
                return Err(Error::contract("head list length differs from sentence length"));
            }
            pairs.extend(hs.iter().enumerate().map(|(i, &h)| (b, i + 1, h)));
        }
        self.score_label_pairs(g, f, &pairs)
    }

    /// Full arc and label scores with dropout off.
    pub fn score(&self, batch: &Batch) -> Result<ScoreBundle> {
        let mut g = Graph::no_grad();
        let f = self.features(&mut g, batch, None)?;
        let arcs = self.score_arcs(&mut g, &f)?;
        let l = self.config.label_count;
        let mut context = Vec::new();
        let mut labels = Vec::new();
        for (b, &n) in batch.lengths.iter().enumerate() {
            let ctx = g.slice_rows(&f.context, f.row(b, 0), n + 1)?;
            context.push(ctx.value().clone());
            let pairs: Vec<_> = (1..=n).flat_map(|i| (0..=n).map(move |h| (b, i, h))).collect();
            let s = self.score_label_pairs(&mut g, &f, &pairs)?;
            labels.push(s.value().clone().reshape(vec![n, n + 1, l])?);
        }
        Ok(ScoreBundle {
            context,
            arc_scores: arcs.iter().map(|v| v.value().clone()).collect(),
            label_scores: labels,
        })
    }

    /// Decodes a batch: arc scores, Chu-Liu/Edmonds, then the best label at
    /// each chosen head.
    pub fn predict_batch(&self, batch: &Batch, single_root: bool) -> Result<Vec<DecodedTree>> {
        let mut g = Graph::no_grad();
        let f = self.features(&mut g, batch, None)?;
        let arcs = self.score_arcs(&mut g, &f)?;
        let mut heads = Vec::with_capacity(arcs.len());
        for s in &arcs {
            heads.push(chu_liu_edmonds(s.value(), single_root)?);
        }
        let label_scores = self.score_labels(&mut g, &f, &heads)?;
        let label_scores = label_scores.value();
        let mut row = 0;
        let mut out = Vec::with_capacity(heads.len());
        for (s, hs) in arcs.iter().zip(heads) {
            let labels = (0..hs.len())
                .map(|i| argmax(label_scores.row(row + i)))
                .collect();
            row += hs.len();
            out.push(DecodedTree {
                score: tree_score(s.value(), &hs),
                heads: hs,
                labels,
            });
        }
        Ok(out)
    }

    /// Parses sentences in consecutive batches of `batch_size`.
    pub fn parse(&self, sentences: &[Sentence], batch_size: usize, single_root: bool) -> Result<Vec<DecodedTree>> {
        if batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        let mut out = Vec::with_capacity(sentences.len());
        for chunk in sentences.chunks(batch_size) {
            let batch = Batch::inference(chunk, &self.vocab)?;
            out.extend(self.predict_batch(&batch, single_root)?);
        }
        Ok(out)
    }

    /// Copies of `sentences` carrying predicted heads and labels.
    pub fn annotate(&self, sentences: &[Sentence], batch_size: usize, single_root: bool) -> Result<Vec<Sentence>> {
        let trees = self.parse(sentences, batch_size, single_root)?;
        Ok(sentences
            .iter()
            .zip(trees)
            .map(|(s, t)| {
                let mut s = s.clone();
                s.labels = t.labels.iter().map(|&l| self.vocab.label(l).to_string()).collect();
                s.heads = t.heads;
                s
            })
            .collect())
    }
}
