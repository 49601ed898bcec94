use crate::conllu::{Sentence, Vocab, PAD, ROOT};
use crate::error::{Error, Result};

/// A padded group of sentences. Position 0 of every sentence is ROOT.
///
/// Id tensors are time-major: the entry for sentence `b` at position `t` sits
/// at `t * batch_size + b`. Sentences shorter than the longest are padded
/// with PAD ids after their last token.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub sentences: Vec<Sentence>,
    /// Token counts, ROOT excluded.
    pub lengths: Vec<usize>,
    /// Longest length plus one for ROOT.
    pub steps: usize,
    pub word_ids: Vec<usize>,
    pub upos_ids: Vec<usize>,
    /// Gold heads per sentence, present for training batches.
    pub heads: Option<Vec<Vec<usize>>>,
    /// Gold label ids per sentence, present for training batches.
    pub labels: Option<Vec<Vec<usize>>>,
    pub vocab_fingerprint: u64,
}

impl Batch {
    /// A batch for inference; gold annotation is ignored.
    pub fn inference(sentences: &[Sentence], vocab: &Vocab) -> Result<Self> {
        Self::build(sentences, vocab, false)
    }

    /// A batch with gold heads and labels. Labels missing from the
    /// vocabulary are a configuration error.
    pub fn training(sentences: &[Sentence], vocab: &Vocab) -> Result<Self> {
        Self::build(sentences, vocab, true)
    }

    fn build(sentences: &[Sentence], vocab: &Vocab, gold: bool) -> Result<Self> {
        if sentences.is_empty() {
            return Err(Error::invalid("empty batch"));
        }
        if let Some(s) = sentences.iter().find(|s| s.is_empty()) {
            return Err(Error::invalid(format!("empty sentence in batch: {:?}", s.comments)));
        }
        let b = sentences.len();
        let lengths: Vec<usize> = sentences.iter().map(Sentence::len).collect();
        let steps = lengths.iter().max().unwrap() + 1;
        let mut word_ids = vec![PAD; steps * b];
        let mut upos_ids = vec![PAD; steps * b];
        for (k, s) in sentences.iter().enumerate() {
            word_ids[k] = ROOT;
            upos_ids[k] = ROOT;
            for (i, (w, u)) in s.tokens.iter().zip(&s.upos).enumerate() {
                word_ids[(i + 1) * b + k] = vocab.word_id(w);
                upos_ids[(i + 1) * b + k] = vocab.upos_id(u);
            }
        }
        let (heads, labels) = if gold {
            let heads = sentences.iter().map(|s| s.heads.clone()).collect();
            let labels = sentences
                .iter()
                .map(|s| {
                    s.labels
                        .iter()
                        .map(|l| {
                            vocab
                                .label_id(l)
                                .ok_or_else(|| Error::Config(format!("label '{}' is not in the vocabulary", l)))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            (Some(heads), Some(labels))
        } else {
            (None, None)
        };
        Ok(Batch {
            sentences: sentences.to_vec(),
            lengths,
            steps,
            word_ids,
            upos_ids,
            heads,
            labels,
            vocab_fingerprint: vocab.fingerprint(),
        })
    }

    pub fn size(&self) -> usize {
        self.lengths.len()
    }

    pub fn token_count(&self) -> usize {
        self.lengths.iter().sum()
    }

    /// Time-major flags marking real tokens (not ROOT, not padding).
    pub fn mask(&self) -> Vec<bool> {
        let b = self.size();
        let mut mask = vec![false; self.steps * b];
        for (k, &n) in self.lengths.iter().enumerate() {
            for t in 1..=n {
                mask[t * b + k] = true;
            }
        }
        mask
    }

    /// Time-major row of every real position (ROOT included), sentence by
    /// sentence. This is the packed order used after encoding.
    pub(crate) fn packed_rows(&self) -> Vec<usize> {
        let b = self.size();
        self.lengths
            .iter()
            .enumerate()
            .flat_map(|(k, &n)| (0..=n).map(move |t| t * b + k))
            .collect()
    }

    /// Offset of each sentence's ROOT row in the packed order.
    pub(crate) fn packed_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.size());
        let mut o = 0;
        for &n in &self.lengths {
            offsets.push(o);
            o += n + 1;
        }
        offsets
    }

    /// Permutation that reverses every sentence (ROOT included) in place and
    /// leaves padding where it is. It is its own inverse.
    pub(crate) fn reversal(&self) -> Vec<usize> {
        let b = self.size();
        let mut perm: Vec<usize> = (0..self.steps * b).collect();
        for (k, &n) in self.lengths.iter().enumerate() {
            for t in 0..=n {
                perm[t * b + k] = (n - t) * b + k;
            }
        }
        perm
    }
}
