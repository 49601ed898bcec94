mod common;

use common::{brute_force_best, random_sentence, rescore};
use depdistill::autodiff::{softmax, Graph, Tensor};
use depdistill::conllu::{parse_conllu, write_conllu, Sentence};
use depdistill::decode::{chu_liu_edmonds, tree_score};
use depdistill::eval::{pair_up, uas_las};
use depdistill::training::{ce_loss, kl_loss};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn score_matrix() -> impl Strategy<Value = Tensor> {
    (1usize..=5).prop_flat_map(|n| {
        prop::collection::vec(-5.0f64..5.0, n * (n + 1))
            .prop_map(move |v| Tensor::matrix(n, n + 1, v).unwrap())
    })
}

fn distribution(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, k).prop_map(|v| softmax(&v).unwrap())
}

proptest! {
    #[test]
    fn decoder_is_optimal(scores in score_matrix(), single in any::<bool>()) {
        let heads = chu_liu_edmonds(&scores, single).unwrap();
        prop_assert!(depdistill::conllu::check_tree(&heads).is_ok());
        if single {
            prop_assert_eq!(heads.iter().filter(|&&h| h == 0).count(), 1);
        }
        let best = brute_force_best(&scores, single);
        prop_assert!((tree_score(&scores, &heads) - best).abs() < 1e-9);
    }

    #[test]
    fn kl_is_non_negative(p in distribution(5), q in distribution(5)) {
        let mut g = Graph::no_grad();
        let lq = g.constant(Tensor::row_vector(q.iter().map(|v| v.ln()).collect()));
        let kl = kl_loss(&mut g, &Tensor::row_vector(p), &lq, &[true]).unwrap();
        prop_assert!(kl.value() >= -1e-12);
    }

    #[test]
    fn kl_of_identical_pair_is_zero(p in distribution(6)) {
        let mut g = Graph::no_grad();
        let lq = g.constant(Tensor::row_vector(p.iter().map(|v| v.ln()).collect()));
        let kl = kl_loss(&mut g, &Tensor::row_vector(p), &lq, &[true]).unwrap();
        prop_assert!(kl.value().abs() < 1e-9);
    }

    #[test]
    fn ce_of_uniform_is_log_k(k in 1usize..50, gold in 0usize..50) {
        let mut g = Graph::no_grad();
        let lp = g.constant(Tensor::row_vector(vec![-(k as f64).ln(); k]));
        let ce = ce_loss(&mut g, &lp, &[Some(gold % k)]).unwrap();
        prop_assert!((ce.value() - (k as f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn attachment_scores_match_rescoring(seed in any::<u64>(), punct in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gold: Vec<Sentence> = (0..rng.gen_range(1..6)).map(|_| {
            let n = rng.gen_range(2..9);
            random_sentence(&mut rng, n)
        }).collect();
        let pred: Vec<Sentence> = gold.iter().map(|g| {
            let mut p = random_sentence(&mut rng, g.len());
            p.tokens = g.tokens.clone();
            for i in 0..g.len() {
                if rng.gen_bool(0.5) {
                    p.heads[i] = g.heads[i];
                }
                if rng.gen_bool(0.5) {
                    p.labels[i] = g.labels[i].clone();
                }
            }
            p
        }).collect();
        let has_scored = gold.iter().flat_map(|s| &s.upos).any(|u| punct || u != "PUNCT");
        prop_assume!(has_scored);
        let s = uas_las(&pair_up(&gold, &pred).unwrap(), punct).unwrap();
        let (uas, las) = rescore(&gold, &pred, punct);
        prop_assert!((s.uas - uas).abs() < 1e-9 && (s.las - las).abs() < 1e-9);
        prop_assert!(s.las <= s.uas);
    }

    #[test]
    fn conllu_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<Sentence> = (0..3).map(|_| {
            let n = rng.gen_range(1..7);
            random_sentence(&mut rng, n)
        }).collect();
        let mut buf = Vec::new();
        write_conllu(&mut buf, &s).unwrap();
        prop_assert_eq!(parse_conllu(buf.as_slice()).unwrap(), s);
    }
}
