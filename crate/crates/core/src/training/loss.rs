use crate::autodiff::{softmax, Graph, Tensor, Var};
use crate::error::{Error, Result};
use crate::model::{Batch, Parser};

const ROW_SUM_TOLERANCE: f64 = 1e-4;

/// A summed loss and the number of tokens it covers.
#[derive(Clone, Debug)]
pub struct Loss {
    pub sum: Var,
    pub count: usize,
}

impl Loss {
    pub fn value(&self) -> f64 {
        self.sum.value().item()
    }

    /// Per-token mean; zero when no token contributed.
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.value() / self.count as f64
        }
    }
}

/// `−Σ log p(gold)` over rows that have a gold target.
pub fn ce_loss(g: &mut Graph, log_probs: &Var, gold: &[Option<usize>]) -> Result<Loss> {
    let picked = g.pick_sum(log_probs, gold)?;
    Ok(Loss {
        sum: g.scale(&picked, -1.0),
        count: gold.iter().filter(|t| t.is_some()).count(),
    })
}

/// `Σ_rows Σ_k P (ln P − log Q)` over masked-in rows. Every selected row of
/// `p` must sum to one.
pub fn kl_loss(g: &mut Graph, p: &Tensor, log_q: &Var, mask: &[bool]) -> Result<Loss> {
    if p.rows() != mask.len() {
        return Err(Error::contract(format!("{} mask flags for {} rows", mask.len(), p.rows())));
    }
    for r in (0..p.rows()).filter(|&r| mask[r]) {
        let row = p.row(r);
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > ROW_SUM_TOLERANCE || row.iter().any(|&v| v < 0.0) {
            return Err(Error::contract(format!(
                "teacher row {} is not a distribution (sums to {})",
                r, total
            )));
        }
    }
    Ok(Loss {
        sum: g.kl_rows(p, log_q, mask)?,
        count: mask.iter().filter(|m| **m).count(),
    })
}

/// Teacher distributions for one batch: per sentence an `n × (n+1)` arc
/// matrix, and one `N × L` label matrix at the gold heads.
#[derive(Clone, Debug)]
pub struct DistillationTargets {
    pub arcs: Vec<Tensor>,
    pub labels: Tensor,
}

fn softmax_rows(t: &Tensor, temperature: f64) -> Result<Tensor> {
    let mut out = Tensor::zeros(&[t.rows(), t.cols()]);
    for r in 0..t.rows() {
        let scaled: Vec<f64> = t.row(r).iter().map(|v| v / temperature).collect();
        out.row_mut(r).copy_from_slice(&softmax(&scaled)?);
    }
    Ok(out)
}

/// Runs the teacher without dropout and returns its tempered distributions.
pub fn teacher_distributions(teacher: &Parser, batch: &Batch, temperature: f64) -> Result<DistillationTargets> {
    if batch.vocab_fingerprint != teacher.vocab.fingerprint() {
        return Err(Error::Config(
            "batch was encoded with a vocabulary other than the teacher's".into(),
        ));
    }
    let heads = batch
        .heads
        .as_ref()
        .ok_or_else(|| Error::invalid("teacher distributions need gold heads"))?;
    let mut g = Graph::no_grad();
    let f = teacher.features(&mut g, batch, None)?;
    let arcs = teacher
        .score_arcs(&mut g, &f)?
        .iter()
        .map(|s| softmax_rows(s.value(), temperature))
        .collect::<Result<Vec<_>>>()?;
    let labels = teacher.score_labels(&mut g, &f, heads)?;
    Ok(DistillationTargets {
        arcs,
        labels: softmax_rows(labels.value(), temperature)?,
    })
}

/// The loss of one batch with its four components as sums over tokens.
/// `total` is the per-token mean that the optimiser minimises; `sum()` is
/// the unnormalised total.
#[derive(Clone, Debug)]
pub struct BatchLoss {
    pub total: Var,
    pub kl_arc: f64,
    pub kl_lab: f64,
    pub ce_arc: f64,
    pub ce_lab: f64,
    pub tokens: usize,
}

impl BatchLoss {
    pub fn sum(&self) -> f64 {
        self.kl_arc + self.kl_lab + self.ce_arc + self.ce_lab
    }
}

fn add_all(g: &mut Graph, terms: &[Var]) -> Result<Var> {
    let mut acc = terms[0].clone();
    for t in &terms[1..] {
        acc = g.add(&acc, t)?;
    }
    Ok(acc)
}

fn tempered_log_softmax(g: &mut Graph, scores: &Var, temperature: f64) -> Result<Var> {
    if temperature == 1.0 {
        g.log_softmax_rows(scores)
    } else {
        let scaled = g.scale(scores, 1.0 / temperature);
        g.log_softmax_rows(&scaled)
    }
}

/// Gold cross entropy on arcs and labels plus, when `targets` is given, the
/// KL divergence from the teacher's distributions to the student's. The
/// temperature applies to the KL terms only.
///
/// `arcs` holds one `n × (n+1)` score matrix per sentence and `labels` the
/// `N × L` label scores at the gold heads.
pub fn parser_loss(
    g: &mut Graph,
    arcs: &[Var],
    labels: &Var,
    gold_heads: &[Vec<usize>],
    gold_labels: &[Vec<usize>],
    targets: Option<&DistillationTargets>,
    temperature: f64,
) -> Result<BatchLoss> {
    if arcs.len() != gold_heads.len() || arcs.len() != gold_labels.len() || arcs.is_empty() {
        return Err(Error::contract("one score matrix and gold tree per sentence expected"));
    }
    if let Some(t) = targets {
        if t.arcs.len() != arcs.len() || t.labels.rows() != labels.value().rows() {
            return Err(Error::contract("teacher targets do not match the batch"));
        }
    }
    let mut terms = Vec::new();
    let (mut kl_arc, mut ce_arc) = (0.0, 0.0);
    for (b, s) in arcs.iter().enumerate() {
        let log_p = g.log_softmax_rows(s)?;
        let gold: Vec<Option<usize>> = gold_heads[b].iter().map(|&h| Some(h)).collect();
        let ce = ce_loss(g, &log_p, &gold)?;
        ce_arc += ce.value();
        terms.push(ce.sum);
        if let Some(t) = targets {
            let log_q = if temperature == 1.0 {
                log_p.clone()
            } else {
                tempered_log_softmax(g, s, temperature)?
            };
            let kl = kl_loss(g, &t.arcs[b], &log_q, &vec![true; gold.len()])?;
            kl_arc += kl.value();
            terms.push(kl.sum);
        }
    }
    let tokens: usize = gold_heads.iter().map(Vec::len).sum();
    let log_l = g.log_softmax_rows(labels)?;
    let gold: Vec<Option<usize>> = gold_labels.iter().flatten().map(|&l| Some(l)).collect();
    let ce = ce_loss(g, &log_l, &gold)?;
    let ce_lab = ce.value();
    terms.push(ce.sum);
    let mut kl_lab = 0.0;
    if let Some(t) = targets {
        let log_q = if temperature == 1.0 {
            log_l
        } else {
            tempered_log_softmax(g, labels, temperature)?
        };
        let kl = kl_loss(g, &t.labels, &log_q, &vec![true; tokens])?;
        kl_lab = kl.value();
        terms.push(kl.sum);
    }
    let sum = add_all(g, &terms)?;
    let total = g.scale(&sum, 1.0 / tokens as f64);
    Ok(BatchLoss {
        total,
        kl_arc,
        kl_lab,
        ce_arc,
        ce_lab,
        tokens,
    })
}

/// `KL_arc + KL_lab + CE_arc + CE_lab` of a student on a batch, given the
/// teacher's targets for that batch.
pub fn distill_loss(
    g: &mut Graph,
    student: &Parser,
    batch: &Batch,
    targets: &DistillationTargets,
    temperature: f64,
) -> Result<BatchLoss> {
    let (heads, labels) = gold(batch)?;
    let f = student.features(g, batch, None)?;
    let arcs = student.score_arcs(g, &f)?;
    let label_scores = student.score_labels(g, &f, heads)?;
    parser_loss(g, &arcs, &label_scores, heads, labels, Some(targets), temperature)
}

pub(crate) type GoldTrees<'a> = (&'a Vec<Vec<usize>>, &'a Vec<Vec<usize>>);

pub(crate) fn gold(batch: &Batch) -> Result<GoldTrees<'_>> {
    match (&batch.heads, &batch.labels) {
        (Some(h), Some(l)) => Ok((h, l)),
        _ => Err(Error::invalid("training needs a batch with gold heads and labels")),
    }
}
