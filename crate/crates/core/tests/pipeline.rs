use depdistill::bench::bench_speed;
use depdistill::conllu::{read_conllu_file, write_conllu_file};
use depdistill::eval::{pair_up, uas_las};
use depdistill::model::{load_model, save_model, scale_config, ModelConfig};
use depdistill::synthetic::{generate, GrammarConfig};
use depdistill::training::{evaluate, train_baseline, train_distilled, TrainingHyper};

fn hyper(epochs: usize) -> TrainingHyper {
    TrainingHyper {
        epochs,
        batch_size_sentences: 8,
        min_freq: 1,
        ..TrainingHyper::default()
    }
}

fn teacher_config() -> ModelConfig {
    let mut c = ModelConfig::full(1, 1, 1);
    c.word_dim = 32;
    c.upos_dim = 16;
    c.lstm_dim = 32;
    c.lstm_layers = 2;
    c.arc_mlp_dim = 32;
    c.label_mlp_dim = 16;
    c
}

#[test]
fn train_save_load_parse_evaluate() {
    let dir = std::env::temp_dir().join(format!("depdistill-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let grammar = GrammarConfig::default();
    let train = generate(&grammar, 40, 1);
    let dev = generate(&grammar, 10, 2);
    write_conllu_file(dir.join("train.conllu"), &train).unwrap();
    let train = read_conllu_file(dir.join("train.conllu")).unwrap();

    let teacher = train_baseline(&teacher_config(), &train, &dev, &hyper(3)).unwrap();
    assert_eq!(teacher.history.len(), 3);
    save_model(dir.join("teacher.model"), &teacher.parser).unwrap();
    let loaded = load_model(dir.join("teacher.model")).unwrap();

    let a = evaluate(&teacher.parser, &dev, 4, true).unwrap();
    let predicted = loaded.annotate(&dev, 7, true).unwrap();
    let b = uas_las(&pair_up(&dev, &predicted).unwrap(), true).unwrap();
    assert_eq!(a, b);

    let student_config = scale_config(&teacher.parser.config, 0.6);
    let student = train_distilled(&loaded, &student_config, &train, &dev, &hyper(2), false).unwrap();
    assert!(student.parser.param_count() < loaded.param_count());
    assert!(student.history.iter().all(|r| r.kl_arc >= 0.0 && r.kl_lab >= 0.0));

    let records = bench_speed(&student.parser, "D-40", &dev, &[1, 4], 2, true).unwrap();
    assert_eq!(records.len(), 4);
    std::fs::remove_dir_all(&dir).unwrap();
}
