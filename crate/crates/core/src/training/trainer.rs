use std::io::Write;
use std::time::Instant;

use log::info;
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hyper::TrainingHyper;
use super::loss::{gold, parser_loss, teacher_distributions};
use crate::autodiff::{AdamState, Graph, ParamSet};
use crate::conllu::{build_vocab, Sentence};
use crate::eval::{pair_up, uas_las, Scores};
use crate::model::{Batch, ModelConfig, Parser};
use crate::error::{Error, Result};

/// Statistics of one training epoch. Loss components are sums over the
/// epoch's tokens; `train_loss` is their per-token mean.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub kl_arc: f64,
    pub kl_lab: f64,
    pub ce_arc: f64,
    pub ce_lab: f64,
    /// NaN when there is no development set.
    pub dev_uas: f64,
    pub dev_las: f64,
    pub seconds: f64,
}

/// A trained model (the best development checkpoint) and its history.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub parser: Parser,
    pub history: Vec<EpochRecord>,
    /// 1-based epoch of the retained checkpoint; `None` when no epoch ran.
    pub best_epoch: Option<usize>,
}

/// What to do after an epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Optional per-epoch callback, e.g. for early stopping.
pub type Observer<'a> = dyn FnMut(&EpochRecord, &Parser) -> Result<Control> + 'a;

/// Parses `sentences` and scores against their gold trees.
pub fn evaluate(parser: &Parser, sentences: &[Sentence], batch_size: usize, single_root: bool) -> Result<Scores> {
    let predicted = parser.annotate(sentences, batch_size, single_root)?;
    uas_las(&pair_up(sentences, &predicted)?, true)
}

/// Sentence indices grouped into batches of similar length. Equal lengths
/// are shuffled among themselves and the batch order is shuffled.
fn length_buckets(sentences: &[Sentence], batch_size: usize, rng: &mut dyn RngCore) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    order.shuffle(rng);
    order.sort_by_key(|&i| sentences[i].len());
    let mut batches: Vec<Vec<usize>> = order.chunks(batch_size).map(<[usize]>::to_vec).collect();
    batches.shuffle(rng);
    batches
}

/// Trains `parser` and returns the best development checkpoint.
/// With a teacher, the loss adds the KL terms and dropout is off.
pub fn train_parser(
    mut parser: Parser,
    teacher: Option<&Parser>,
    train: &[Sentence],
    dev: &[Sentence],
    hyper: &TrainingHyper,
    mut observer: Option<&mut Observer<'_>>,
) -> Result<TrainOutcome> {
    hyper.validate()?;
    if train.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    if let Some(t) = teacher {
        if t.vocab.fingerprint() != parser.vocab.fingerprint() {
            return Err(Error::Config("teacher and student vocabularies differ".into()));
        }
    }
    if teacher.is_some() {
        parser.config.emb_dropout = 0.0;
        parser.config.dropout = 0.0;
    } else {
        parser.config.emb_dropout = hyper.emb_dropout;
        parser.config.dropout = hyper.dropout;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed.wrapping_add(0x5eed));
    let adam_config = hyper.adam();
    let mut adam = AdamState::new(&parser.params);
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, ParamSet)> = None;

    for epoch in 1..=hyper.epochs {
        let started = Instant::now();
        let (mut kl_arc, mut kl_lab, mut ce_arc, mut ce_lab, mut tokens) = (0.0, 0.0, 0.0, 0.0, 0usize);
        for indices in length_buckets(train, hyper.batch_size_sentences, &mut rng) {
            let sentences: Vec<Sentence> = indices.iter().map(|&i| train[i].clone()).collect();
            let batch = Batch::training(&sentences, &parser.vocab)?;
            let targets = match teacher {
                Some(t) => Some(teacher_distributions(t, &batch, hyper.temperature)?),
                None => None,
            };
            let (heads, labels) = gold(&batch)?;
            let grads = {
                let mut g = Graph::new();
                let dropout: Option<&mut dyn RngCore> = if teacher.is_some() { None } else { Some(&mut rng) };
                let f = parser.features(&mut g, &batch, dropout)?;
                let arcs = parser.score_arcs(&mut g, &f)?;
                let label_scores = parser.score_labels(&mut g, &f, heads)?;
                let loss = parser_loss(&mut g, &arcs, &label_scores, heads, labels, targets.as_ref(), hyper.temperature)?;
                if !loss.total.value().item().is_finite() {
                    return Err(Error::Training {
                        step: adam.step(),
                        message: format!(
                            "non-finite loss in epoch {} (ce_arc {}, ce_lab {}, kl_arc {}, kl_lab {}, {} tokens)",
                            epoch, loss.ce_arc, loss.ce_lab, loss.kl_arc, loss.kl_lab, loss.tokens
                        ),
                    });
                }
                kl_arc += loss.kl_arc;
                kl_lab += loss.kl_lab;
                ce_arc += loss.ce_arc;
                ce_lab += loss.ce_lab;
                tokens += loss.tokens;
                g.backward(&loss.total, &parser.params)?
            };
            adam.update(&mut parser.params, &grads, &adam_config)?;
        }

        let (dev_uas, dev_las) = if dev.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let s = evaluate(&parser, dev, 256, true)?;
            (s.uas, s.las)
        };
        let record = EpochRecord {
            epoch,
            train_loss: (kl_arc + kl_lab + ce_arc + ce_lab) / tokens as f64,
            kl_arc,
            kl_lab,
            ce_arc,
            ce_lab,
            dev_uas,
            dev_las,
            seconds: started.elapsed().as_secs_f64(),
        };
        info!(
            "epoch {}: loss {:.4} dev UAS {:.2} LAS {:.2} ({:.1}s)",
            epoch, record.train_loss, dev_uas, dev_las, record.seconds
        );
        let improved = match &best {
            None => true,
            Some((las, _, _)) => dev.is_empty() || dev_las > *las,
        };
        if improved {
            best = Some((dev_las, epoch, parser.params.clone()));
        }
        history.push(record);
        if let Some(obs) = observer.as_mut() {
            if obs(history.last().unwrap(), &parser)? == Control::Stop {
                break;
            }
        }
    }

    let best_epoch = best.as_ref().map(|b| b.1);
    if let Some((_, _, params)) = best {
        parser.params = params;
    }
    Ok(TrainOutcome {
        parser,
        history,
        best_epoch,
    })
}

/// A fresh parser for `train`, initialised from the run's seed.
pub fn init_parser(config: &ModelConfig, train: &[Sentence], hyper: &TrainingHyper) -> Result<Parser> {
    let vocab = build_vocab(train, hyper.min_freq);
    Parser::new(config.clone(), vocab, &mut ChaCha8Rng::seed_from_u64(hyper.seed))
}

/// Gold cross-entropy training with dropout.
pub fn train_baseline(
    config: &ModelConfig,
    train: &[Sentence],
    dev: &[Sentence],
    hyper: &TrainingHyper,
) -> Result<TrainOutcome> {
    let parser = init_parser(config, train, hyper)?;
    train_parser(parser, None, train, dev, hyper, None)
}

/// Distillation from a frozen teacher. The student shares the teacher's
/// vocabulary; with `init_from_teacher` its configuration must equal the
/// teacher's and it starts from the teacher's weights.
pub fn train_distilled(
    teacher: &Parser,
    student_config: &ModelConfig,
    train: &[Sentence],
    dev: &[Sentence],
    hyper: &TrainingHyper,
    init_from_teacher: bool,
) -> Result<TrainOutcome> {
    let student = student_from(teacher, student_config, hyper, init_from_teacher)?;
    train_parser(student, Some(teacher), train, dev, hyper, None)
}

/// Builds the initial student for distillation.
pub fn student_from(
    teacher: &Parser,
    student_config: &ModelConfig,
    hyper: &TrainingHyper,
    init_from_teacher: bool,
) -> Result<Parser> {
    if init_from_teacher {
        let same = ModelConfig {
            emb_dropout: teacher.config.emb_dropout,
            dropout: teacher.config.dropout,
            word_vocab_size: teacher.config.word_vocab_size,
            upos_vocab_size: teacher.config.upos_vocab_size,
            label_count: teacher.config.label_count,
            ..student_config.clone()
        } == teacher.config;
        if !same {
            return Err(Error::Config(
                "a student initialised from the teacher needs the teacher's dimensions".into(),
            ));
        }
        return Ok(teacher.clone());
    }
    Parser::new(
        student_config.clone(),
        teacher.vocab.clone(),
        &mut ChaCha8Rng::seed_from_u64(hyper.seed),
    )
}

/// Writes the history with columns epoch, train_loss, kl_arc, kl_lab,
/// ce_arc, ce_lab, dev_uas, dev_las, seconds.
pub fn write_history_csv<W: Write>(writer: W, history: &[EpochRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "epoch", "train_loss", "kl_arc", "kl_lab", "ce_arc", "ce_lab", "dev_uas", "dev_las", "seconds",
    ])?;
    for r in history {
        w.write_record([
            r.epoch.to_string(),
            format!("{:?}", r.train_loss),
            format!("{:?}", r.kl_arc),
            format!("{:?}", r.kl_lab),
            format!("{:?}", r.ce_arc),
            format!("{:?}", r.ce_lab),
            format!("{:?}", r.dev_uas),
            format!("{:?}", r.dev_las),
            format!("{:.3}", r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate, GrammarConfig};

    fn tiny() -> ModelConfig {
        let mut c = ModelConfig::full(1, 1, 1);
        c.word_dim = 8;
        c.upos_dim = 4;
        c.lstm_dim = 8;
        c.lstm_layers = 1;
        c.arc_mlp_dim = 8;
        c.label_mlp_dim = 4;
        c
    }

    fn hyper(epochs: usize) -> TrainingHyper {
        TrainingHyper {
            epochs,
            batch_size_sentences: 8,
            seed: 11,
            min_freq: 1,
            ..TrainingHyper::default()
        }
    }

    fn data() -> (Vec<Sentence>, Vec<Sentence>) {
        let all = generate(&GrammarConfig::default(), 24, 3);
        (all[..16].to_vec(), all[16..].to_vec())
    }

    #[test]
    fn zero_epochs_returns_initial_model() {
        let (train, dev) = data();
        let out = train_baseline(&tiny(), &train, &dev, &hyper(0)).unwrap();
        assert!(out.history.is_empty());
        assert_eq!(out.best_epoch, None);
        let init = init_parser(&tiny(), &train, &hyper(0)).unwrap();
        for ((_, a), (_, b)) in out.parser.params.iter().zip(init.params.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn fixed_seed_gives_identical_history() {
        let (train, dev) = data();
        let strip = |h: Vec<EpochRecord>| {
            h.into_iter()
                .map(|r| EpochRecord { seconds: 0.0, ..r })
                .collect::<Vec<_>>()
        };
        let a = train_baseline(&tiny(), &train, &dev, &hyper(2)).unwrap();
        let b = train_baseline(&tiny(), &train, &dev, &hyper(2)).unwrap();
        assert_eq!(strip(a.history), strip(b.history));
    }

    #[test]
    fn loss_decreases_on_tiny_corpus() {
        let (train, dev) = data();
        let mut h = hyper(8);
        h.dropout = 0.0;
        h.emb_dropout = 0.0;
        let out = train_baseline(&tiny(), &train, &dev, &h).unwrap();
        assert!(out.history.last().unwrap().train_loss < out.history[0].train_loss);
        assert!(out.history.iter().all(|r| r.kl_arc == 0.0 && r.kl_lab == 0.0));
    }

    #[test]
    fn identity_student_starts_with_zero_kl_and_teacher_stays_frozen() {
        let (train, dev) = data();
        let teacher = train_baseline(&tiny(), &train, &dev, &hyper(1)).unwrap().parser;
        let snapshot = teacher.params.clone();
        let mut h = hyper(1);
        h.learning_rate = 1e-12;
        let out = train_distilled(&teacher, &teacher.config, &train, &dev, &h, true).unwrap();
        let r = &out.history[0];
        assert!(r.kl_arc.abs() < 1e-6 && r.kl_lab.abs() < 1e-6, "{:?}", r);
        for ((_, a), (_, b)) in teacher.params.iter().zip(snapshot.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn mismatched_student_cannot_copy_teacher() {
        let (train, dev) = data();
        let teacher = train_baseline(&tiny(), &train, &dev, &hyper(0)).unwrap().parser;
        let mut other = tiny();
        other.lstm_dim = 4;
        assert!(train_distilled(&teacher, &other, &train, &dev, &hyper(1), true).is_err());
        assert!(train_distilled(&teacher, &other, &train, &dev, &hyper(1), false).is_ok());
    }

    #[test]
    fn history_csv_header() {
        let mut buf = Vec::new();
        write_history_csv(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epoch,train_loss,kl_arc,kl_lab,ce_arc,ce_lab,dev_uas,dev_las,seconds\n"
        );
    }
}
