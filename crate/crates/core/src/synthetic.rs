//! A seeded toy grammar producing dependency trees with UD-style labels.
//!
//! Sentences follow `NP VP [ADV] [PUNCT]` where the verb takes an object
//! and optional prepositional phrases. Whether a PP after the object
//! attaches to the verb (`obl`) or to the object noun (`nmod`) depends on
//! the lexical pair (preposition, PP noun), with some noise. This gives the
//! corpus attachment ambiguity that only lexical statistics resolve.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conllu::Sentence;

#[derive(Clone, Debug, PartialEq)]
pub struct GrammarConfig {
    pub nouns: usize,
    pub verbs: usize,
    pub adjectives: usize,
    pub prepositions: usize,
    pub adverbs: usize,
    /// Probability of each further PP after the object.
    pub pp_prob: f64,
    pub max_pps: usize,
    /// Probability that a PP ignores its lexical attachment preference.
    pub attachment_noise: f64,
    /// Seed of the lexicon and attachment preferences, shared by all
    /// corpora drawn from the same grammar.
    pub lexicon_seed: u64,
}

impl Default for GrammarConfig {
    fn default() -> Self {
        GrammarConfig {
            nouns: 40,
            verbs: 15,
            adjectives: 12,
            prepositions: 6,
            adverbs: 6,
            pp_prob: 0.6,
            max_pps: 3,
            attachment_noise: 0.1,
            lexicon_seed: 2020,
        }
    }
}

const DETERMINERS: [&str; 4] = ["the", "a", "this", "every"];

struct Lexicon {
    /// `verb_pref[p][n]`: PP (preposition p, noun n) prefers the verb.
    verb_pref: Vec<Vec<bool>>,
    /// Verbs that tend to take a PP object.
    pp_verbs: Vec<bool>,
}

impl Lexicon {
    fn new(c: &GrammarConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(c.lexicon_seed);
        let verb_pref = (0..c.prepositions)
            .map(|_| {
                let bias: f64 = rng.gen_range(0.2..0.8);
                (0..c.nouns).map(|_| rng.gen_bool(bias)).collect()
            })
            .collect();
        let pp_verbs = (0..c.verbs).map(|_| rng.gen_bool(0.5)).collect();
        Lexicon { verb_pref, pp_verbs }
    }
}

struct Token {
    form: String,
    upos: &'static str,
    head: usize,
    label: &'static str,
}

struct Builder<'a> {
    c: &'a GrammarConfig,
    lex: &'a Lexicon,
    tokens: Vec<Token>,
}

impl Builder<'_> {
    fn push(&mut self, form: String, upos: &'static str) -> usize {
        self.tokens.push(Token {
            form,
            upos,
            head: 0,
            label: "root",
        });
        self.tokens.len()
    }

    fn attach(&mut self, dep: usize, head: usize, label: &'static str) {
        let t = &mut self.tokens[dep - 1];
        t.head = head;
        t.label = label;
    }

    /// Returns (head position, noun id).
    fn noun_phrase<R: Rng>(&mut self, rng: &mut R) -> (usize, usize) {
        let mut modifiers = Vec::new();
        if rng.gen_bool(0.8) {
            let d = *DETERMINERS.choose(rng).unwrap();
            modifiers.push((self.push(d.to_string(), "DET"), "det"));
        }
        let adjectives = [0, 0, 1, 1, 2].choose(rng).copied().unwrap();
        for _ in 0..adjectives {
            let a = rng.gen_range(0..self.c.adjectives);
            modifiers.push((self.push(format!("adj{}", a), "ADJ"), "amod"));
        }
        let n = rng.gen_range(0..self.c.nouns);
        let head = self.push(format!("noun{}", n), "NOUN");
        for (m, label) in modifiers {
            self.attach(m, head, label);
        }
        (head, n)
    }

    /// A PP whose attachment is decided by the caller; returns the
    /// preposition id, the PP noun position and its id.
    fn prep_phrase<R: Rng>(&mut self, rng: &mut R) -> (usize, usize, usize) {
        let p = rng.gen_range(0..self.c.prepositions);
        let case = self.push(format!("prep{}", p), "ADP");
        let (noun, n) = self.noun_phrase(rng);
        self.attach(case, noun, "case");
        (p, noun, n)
    }

    fn sentence<R: Rng>(&mut self, rng: &mut R) {
        let (subject, _) = self.noun_phrase(rng);
        if rng.gen_bool(0.15) {
            let (_, pp, _) = self.prep_phrase(rng);
            self.attach(pp, subject, "nmod");
        }
        let v = rng.gen_range(0..self.c.verbs);
        let verb = self.push(format!("verb{}", v), "VERB");
        self.attach(subject, verb, "nsubj");
        let (object, _) = self.noun_phrase(rng);
        self.attach(object, verb, "obj");
        let mut last_noun = object;
        let mut pps = 0;
        let pp_prob = if self.lex.pp_verbs[v] { self.c.pp_prob } else { self.c.pp_prob * 0.5 };
        while pps < self.c.max_pps && rng.gen_bool(pp_prob) {
            let (p, pp, n) = self.prep_phrase(rng);
            let mut to_verb = self.lex.verb_pref[p][n];
            if rng.gen_bool(self.c.attachment_noise) {
                to_verb = !to_verb;
            }
            if to_verb {
                self.attach(pp, verb, "obl");
            } else {
                self.attach(pp, last_noun, "nmod");
            }
            last_noun = pp;
            pps += 1;
        }
        if rng.gen_bool(0.3) {
            let a = rng.gen_range(0..self.c.adverbs);
            let adv = self.push(format!("adv{}", a), "ADV");
            self.attach(adv, verb, "advmod");
        }
        if rng.gen_bool(0.7) {
            let p = self.push(".".to_string(), "PUNCT");
            self.attach(p, verb, "punct");
        }
        self.attach(verb, 0, "root");
    }
}

/// `count` sentences drawn from the grammar with the given seed.
pub fn generate(config: &GrammarConfig, count: usize, seed: u64) -> Vec<Sentence> {
    let lex = Lexicon::new(config);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let mut b = Builder {
                c: config,
                lex: &lex,
                tokens: Vec::new(),
            };
            b.sentence(&mut rng);
            let mut s = Sentence::new(
                b.tokens.iter().map(|t| t.form.clone()).collect(),
                b.tokens.iter().map(|t| t.upos.to_string()).collect(),
                b.tokens.iter().map(|t| t.head).collect(),
                b.tokens.iter().map(|t| t.label.to_string()).collect(),
            )
            .expect("grammar yields trees");
            s.comments = vec![format!("# sent_id = synthetic-{}-{}", seed, k + 1)];
            s
        })
        .collect()
}
