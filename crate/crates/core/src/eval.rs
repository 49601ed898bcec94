//! Attachment scores.

use std::io::Write;

use crate::conllu::Sentence;
use crate::error::{Error, Result};

pub const PUNCT: &str = "PUNCT";

/// A gold tree and a prediction for the same sentence.
#[derive(Clone, Copy, Debug)]
pub struct EvalPair<'a> {
    pub gold: &'a Sentence,
    pub predicted: &'a Sentence,
}

/// Attachment scores in percent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scores {
    pub uas: f64,
    pub las: f64,
    pub tokens: usize,
}

/// Micro-averaged UAS and LAS. With `include_punct` off, tokens whose gold
/// UPOS is PUNCT are left out of numerator and denominator.
pub fn uas_las(pairs: &[EvalPair<'_>], include_punct: bool) -> Result<Scores> {
    if pairs.is_empty() {
        return Err(Error::invalid("nothing to evaluate"));
    }
    let (mut total, mut heads, mut both) = (0usize, 0usize, 0usize);
    for (k, p) in pairs.iter().enumerate() {
        let (g, s) = (p.gold, p.predicted);
        if g.len() != s.len() {
            return Err(Error::invalid(format!(
                "sentence {}: gold has {} tokens, prediction {}",
                k + 1,
                g.len(),
                s.len()
            )));
        }
        for i in 0..g.len() {
            if !include_punct && g.upos[i] == PUNCT {
                continue;
            }
            total += 1;
            if g.heads[i] == s.heads[i] {
                heads += 1;
                if g.labels[i] == s.labels[i] {
                    both += 1;
                }
            }
        }
    }
    let pct = |x: usize| if total == 0 { 0.0 } else { 100.0 * x as f64 / total as f64 };
    Ok(Scores {
        uas: pct(heads),
        las: pct(both),
        tokens: total,
    })
}

/// Pairs gold and predicted treebanks sentence by sentence.
pub fn pair_up<'a>(gold: &'a [Sentence], predicted: &'a [Sentence]) -> Result<Vec<EvalPair<'a>>> {
    if gold.len() != predicted.len() {
        return Err(Error::invalid(format!(
            "{} gold sentences but {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    Ok(gold
        .iter()
        .zip(predicted)
        .map(|(gold, predicted)| EvalPair { gold, predicted })
        .collect())
}

/// One evaluation result row.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    pub model_tag: String,
    pub treebank: String,
    pub uas: f64,
    pub las: f64,
}

/// Writes `model_tag,treebank,uas,las` rows under a header.
pub fn write_eval_csv<W: Write>(writer: W, records: &[EvalRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model_tag", "treebank", "uas", "las"])?;
    for r in records {
        w.write_record([
            r.model_tag.clone(),
            r.treebank.clone(),
            format!("{:?}", r.uas),
            format!("{:?}", r.las),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_eval_csv<R: std::io::Read>(reader: R) -> Result<Vec<EvalRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = out.len() + 2;
        let field = |i: usize| row.get(i).unwrap_or("").to_string();
        let num = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|_| Error::Format {
                    line,
                    message: format!("bad number '{}'", field(i)),
                })
        };
        out.push(EvalRecord {
            model_tag: field(0),
            treebank: field(1),
            uas: num(2)?,
            las: num(3)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::{io_fixture::FIG1, parse_conllu};

    fn fig1() -> Sentence {
        parse_conllu(FIG1.as_bytes()).unwrap().remove(0)
    }

    #[test]
    fn perfect_prediction() {
        let g = fig1();
        let s = uas_las(&[EvalPair { gold: &g, predicted: &g }], true).unwrap();
        assert_eq!((s.uas, s.las), (100.0, 100.0));
    }

    #[test]
    fn one_wrong_label_in_fig1() {
        let g = fig1();
        let mut p = g.clone();
        p.labels[6] = "nmod".into();
        let s = uas_las(&[EvalPair { gold: &g, predicted: &p }], true).unwrap();
        assert_eq!((s.uas, s.las), (100.0, 87.5));
    }

    #[test]
    fn all_heads_wrong() {
        let g = fig1();
        let mut p = g.clone();
        for h in p.heads.iter_mut() {
            *h = (*h + 1) % 9;
        }
        let s = uas_las(&[EvalPair { gold: &g, predicted: &p }], true).unwrap();
        assert_eq!((s.uas, s.las), (0.0, 0.0));
    }

    #[test]
    fn punctuation_can_be_excluded() {
        let g = Sentence::from_parts(&["Hi", "!"], &["INTJ", "PUNCT"], &[0, 1], &["root", "punct"]).unwrap();
        let mut p = g.clone();
        p.heads[1] = 0;
        let with = uas_las(&[EvalPair { gold: &g, predicted: &p }], true).unwrap();
        let without = uas_las(&[EvalPair { gold: &g, predicted: &p }], false).unwrap();
        assert_eq!(with.uas, 50.0);
        assert_eq!(without.uas, 100.0);
        assert_eq!(without.tokens, 1);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let g = fig1();
        let p = Sentence::from_parts(&["a"], &["X"], &[0], &["root"]).unwrap();
        assert!(uas_las(&[EvalPair { gold: &g, predicted: &p }], true).is_err());
        assert!(uas_las(&[], true).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![
            EvalRecord { model_tag: "Full".into(), treebank: "toy".into(), uas: 91.25, las: 88.0 },
            EvalRecord { model_tag: "D-20".into(), treebank: "toy".into(), uas: 1.0 / 3.0, las: 0.0 },
        ];
        let mut buf = Vec::new();
        write_eval_csv(&mut buf, &records).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("model_tag,treebank,uas,las\n"));
        assert_eq!(read_eval_csv(buf.as_slice()).unwrap(), records);
        let mut empty = Vec::new();
        write_eval_csv(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap(), "model_tag,treebank,uas,las\n");
    }
}
