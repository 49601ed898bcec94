use crate::error::{Error, Result};

/// A gold (or predicted) dependency tree over syntactic words.
///
/// `heads[i]` is the 1-based head position of token `i + 1`, with 0 for the
/// artificial root.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    pub comments: Vec<String>,
    pub tokens: Vec<String>,
    pub upos: Vec<String>,
    pub heads: Vec<usize>,
    pub labels: Vec<String>,
}

impl Sentence {
    /// Builds and validates a sentence.
    pub fn new(
        tokens: Vec<String>,
        upos: Vec<String>,
        heads: Vec<usize>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let sentence = Sentence {
            comments: Vec::new(),
            tokens,
            upos,
            heads,
            labels,
        };
        sentence.validate()?;
        Ok(sentence)
    }

    /// Convenience constructor for tests and generated data.
    pub fn from_parts(tokens: &[&str], upos: &[&str], heads: &[usize], labels: &[&str]) -> Result<Self> {
        Self::new(
            tokens.iter().map(|s| s.to_string()).collect(),
            upos.iter().map(|s| s.to_string()).collect(),
            heads.to_vec(),
            labels.iter().map(|s| s.to_string()).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(Error::invalid("sentence has no tokens"));
        }
        if self.upos.len() != n || self.heads.len() != n || self.labels.len() != n {
            return Err(Error::invalid(format!(
                "sentence columns differ in length: {} tokens, {} tags, {} heads, {} labels",
                n,
                self.upos.len(),
                self.heads.len(),
                self.labels.len()
            )));
        }
        check_tree(&self.heads).map_err(Error::InvalidArgument)
    }
}

/// Checks that a head vector forms a tree rooted at 0. On failure, returns a
/// description of the first offending token.
pub fn check_tree(heads: &[usize]) -> std::result::Result<(), String> {
    let n = heads.len();
    for (i, &h) in heads.iter().enumerate() {
        if h > n {
            return Err(format!("head {} of token {} is out of range", h, i + 1));
        }
        if h == i + 1 {
            return Err(format!("token {} is its own head", i + 1));
        }
    }
    // 0 = unvisited, 1 = on current path, 2 = reaches root
    let mut state = vec![0u8; n + 1];
    state[0] = 2;
    for start in 1..=n {
        let mut path = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            v = heads[v - 1];
        }
        if state[v] == 1 {
            return Err(format!("token {} is part of a cycle", v));
        }
        for p in path {
            state[p] = 2;
        }
    }
    Ok(())
}
