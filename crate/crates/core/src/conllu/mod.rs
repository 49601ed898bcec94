//! CoNLL-U treebanks: sentences, reading and writing, vocabularies,
//! pretrained embeddings and treebank statistics.

mod embeddings;
mod io;
mod sentence;
mod stats;
mod vocab;

pub use embeddings::{load_embeddings, Embeddings};
pub use io::{parse_conllu, read_conllu_file, write_conllu, write_conllu_file};
pub use sentence::{check_tree, Sentence};
pub use stats::{treebank_stats, write_stats_csv, ArcConvention, TreebankStats};
pub use vocab::{build_vocab, Vocab, PAD, ROOT, ROOT_FORM, UNK};
