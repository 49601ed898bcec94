use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

use super::sentence::Sentence;
use crate::error::{Error, Result};

/// Reserved ids, shared by the word and UPOS inventories.
pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const ROOT: usize = 2;

pub const ROOT_FORM: &str = "<root>";
const RESERVED: [&str; 3] = ["<pad>", "<unk>", ROOT_FORM];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Inventory {
    items: Vec<String>,
    index: HashMap<String, usize>,
}

impl Inventory {
    fn with_reserved(reserved: &[&str]) -> Self {
        let mut inv = Inventory::default();
        for r in reserved {
            inv.insert(r);
        }
        inv
    }

    fn insert(&mut self, item: &str) -> usize {
        if let Some(&id) = self.index.get(item) {
            return id;
        }
        self.items.push(item.to_string());
        self.index.insert(item.to_string(), self.items.len() - 1);
        self.items.len() - 1
    }

    fn get(&self, item: &str) -> Option<usize> {
        self.index.get(item).copied()
    }
}

/// Word, UPOS and dependency-label inventories.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocab {
    words: Inventory,
    upos: Inventory,
    labels: Inventory,
    word_freq: BTreeMap<String, usize>,
}

impl Vocab {
    /// Reconstructs a vocabulary from its item lists, e.g. after loading a
    /// model. Word and tag lists must start with the reserved entries.
    pub fn from_lists(words: Vec<String>, upos: Vec<String>, labels: Vec<String>) -> Result<Self> {
        for list in [&words, &upos] {
            if list.len() < RESERVED.len() || list[..RESERVED.len()] != RESERVED {
                return Err(Error::invalid("vocabulary lacks the reserved entries"));
            }
        }
        let build = |items: Vec<String>| {
            let mut inv = Inventory::default();
            for item in &items {
                inv.insert(item);
            }
            if inv.items.len() != items.len() {
                return Err(Error::invalid("vocabulary contains duplicates"));
            }
            Ok(inv)
        };
        Ok(Vocab {
            words: build(words)?,
            upos: build(upos)?,
            labels: build(labels)?,
            word_freq: BTreeMap::new(),
        })
    }

    pub fn word_id(&self, form: &str) -> usize {
        self.words.get(form).unwrap_or(UNK)
    }

    pub fn upos_id(&self, tag: &str) -> usize {
        self.upos.get(tag).unwrap_or(UNK)
    }

    pub fn label_id(&self, label: &str) -> Option<usize> {
        self.labels.get(label)
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels.items[id]
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words.items[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words.items
    }

    pub fn upos_tags(&self) -> &[String] {
        &self.upos.items
    }

    pub fn labels(&self) -> &[String] {
        &self.labels.items
    }

    pub fn word_count(&self) -> usize {
        self.words.items.len()
    }

    pub fn upos_count(&self) -> usize {
        self.upos.items.len()
    }

    pub fn label_count(&self) -> usize {
        self.labels.items.len()
    }

    /// Training-corpus frequency of a word form (0 for loaded vocabularies).
    pub fn frequency(&self, form: &str) -> usize {
        self.word_freq.get(form).copied().unwrap_or(0)
    }

    /// Stable digest of the inventories, used to detect data encoded with
    /// a different vocabulary.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = DefaultHasher::new();
        self.words.items.hash(&mut hasher);
        self.upos.items.hash(&mut hasher);
        self.labels.items.hash(&mut hasher);
        hasher.finish()
    }
}

/// Builds inventories from a treebank. Words below `min_freq` map to UNK;
/// every UPOS tag and label seen gets an id. Ids follow first occurrence.
pub fn build_vocab(sentences: &[Sentence], min_freq: usize) -> Vocab {
    let min_freq = min_freq.max(1);
    let mut freq: BTreeMap<String, usize> = BTreeMap::new();
    let mut order = Vec::new();
    for s in sentences {
        for t in &s.tokens {
            let count = freq.entry(t.clone()).or_insert(0);
            if *count == 0 {
                order.push(t.clone());
            }
            *count += 1;
        }
    }

    let mut words = Inventory::with_reserved(&RESERVED);
    for w in order.iter().filter(|w| freq[*w] >= min_freq) {
        words.insert(w);
    }
    let mut upos = Inventory::with_reserved(&RESERVED);
    let mut labels = Inventory::default();
    for s in sentences {
        for tag in &s.upos {
            upos.insert(tag);
        }
        for label in &s.labels {
            labels.insert(label);
        }
    }
    Vocab {
        words,
        upos,
        labels,
        word_freq: freq,
    }
}
