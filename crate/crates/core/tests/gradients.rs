mod common;

use common::{max_gradient_error, op_cases, tiny_config};
use depdistill::conllu::{build_vocab, Sentence};
use depdistill::model::{Batch, Parser};
use depdistill::training::{distill_loss, teacher_distributions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn every_op_matches_finite_differences() {
    for (name, params, loss) in op_cases() {
        let err = max_gradient_error(&params, &*loss).unwrap();
        assert!(err < 1e-4, "{}: relative error {}", name, err);
    }
}

fn three_tokens() -> Sentence {
    Sentence::from_parts(
        &["dogs", "chase", "cats"],
        &["NOUN", "VERB", "NOUN"],
        &[2, 0, 2],
        &["nsubj", "root", "obj"],
    )
    .unwrap()
}

fn distill_error(temperature: f64) -> f64 {
    let s = vec![three_tokens()];
    let vocab = build_vocab(&s, 1);
    let teacher = Parser::new(tiny_config(), vocab.clone(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let mut small = tiny_config();
    small.lstm_layers = 1;
    let student = Parser::new(small, vocab, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let batch = Batch::training(&s, &student.vocab).unwrap();
    let targets = teacher_distributions(&teacher, &batch, temperature).unwrap();
    max_gradient_error(&student.params, |g, p| {
        let mut st = student.clone();
        st.params = p.clone();
        Ok(distill_loss(g, &st, &batch, &targets, temperature)?.total)
    })
    .unwrap()
}

#[test]
fn distill_loss_gradient_on_three_tokens() {
    let err = distill_error(1.0);
    assert!(err < 1e-4, "relative error {}", err);
}

#[test]
fn tempered_distill_loss_gradient() {
    let err = distill_error(2.0);
    assert!(err < 1e-4, "relative error {}", err);
}
