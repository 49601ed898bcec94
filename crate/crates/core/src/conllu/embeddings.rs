use std::io::BufRead;

use rand::Rng;

use super::vocab::{Vocab, PAD, ROOT};
use crate::autodiff::Tensor;
use crate::error::{Error, Result};

/// Word embedding matrix aligned with a vocabulary.
#[derive(Clone, Debug)]
pub struct Embeddings {
    /// `word_count × dim`
    pub matrix: Tensor,
    /// Fraction of non-reserved vocabulary words found in the file.
    pub coverage: f64,
}

/// Reads whitespace-separated `word v1 … v_dim` lines. A leading
/// `count dim` header line is tolerated. Rows of words absent from the file
/// are drawn uniformly from ±1/√dim; the padding row stays zero.
pub fn load_embeddings<R: BufRead, G: Rng>(reader: R, vocab: &Vocab, dim: usize, rng: &mut G) -> Result<Embeddings> {
    if dim == 0 {
        return Err(Error::invalid("embedding dimension must be positive"));
    }
    let bound = 1.0 / (dim as f64).sqrt();
    let rows = vocab.word_count();
    let mut data: Vec<f64> = (0..rows * dim).map(|_| rng.gen_range(-bound..=bound)).collect();
    data[PAD * dim..(PAD + 1) * dim].iter_mut().for_each(|v| *v = 0.0);

    let reserved = ROOT + 1;
    let mut found = vec![false; rows];
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if line_no == 1 && fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok()) {
            continue;
        }
        if fields.len() != dim + 1 {
            return Err(Error::Format {
                line: line_no,
                message: format!("expected {} values, found {}", dim, fields.len() - 1),
            });
        }
        let id = vocab.word_id(fields[0]);
        let known = vocab.words().get(id).map(String::as_str) == Some(fields[0]);
        if !known || id < reserved {
            continue;
        }
        for (k, field) in fields[1..].iter().enumerate() {
            data[id * dim + k] = field.parse().map_err(|_| Error::Format {
                line: line_no,
                message: format!("invalid number '{}'", field),
            })?;
        }
        found[id] = true;
    }

    let candidates = rows - reserved;
    let coverage = if candidates == 0 {
        0.0
    } else {
        found.iter().filter(|f| **f).count() as f64 / candidates as f64
    };
    Ok(Embeddings {
        matrix: Tensor::matrix(rows, dim, data)?,
        coverage,
    })
}
