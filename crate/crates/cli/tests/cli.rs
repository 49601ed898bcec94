use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use depdistill::conllu::{parse_conllu, write_conllu_file};
use depdistill::synthetic::{generate, GrammarConfig};

const SMALL: [&str; 7] = [
    "word_dim=8",
    "upos_dim=4",
    "lstm_dim=8",
    "lstm_layers=1",
    "arc_mlp_dim=8",
    "label_mlp_dim=4",
    "min_freq=1",
];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depdistill"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace {
            dir: tempfile::tempdir().unwrap(),
        };
        let g = GrammarConfig::default();
        write_conllu_file(ws.path("train.conllu"), &generate(&g, 24, 1)).unwrap();
        write_conllu_file(ws.path("dev.conllu"), &generate(&g, 8, 2)).unwrap();
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn train(&self, out: &str, extra: &[&str]) -> Output {
        let model = self.path(out);
        let (train, dev) = (self.path("train.conllu"), self.path("dev.conllu"));
        let mut args = vec!["train", "--out", s(&model), s(&train), s(&dev)];
        for kv in SMALL.iter().chain(extra) {
            args.push("--set");
            args.push(kv);
        }
        run(&args)
    }
}

#[test]
fn stats_counts_trees() {
    let ws = Workspace::new();
    let o = run(&["stats", s(&ws.path("train.conllu"))]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("treebank,trees,avg_sent_len"));
    assert!(lines.next().unwrap().starts_with("train,24,"));
}

#[test]
fn train_parse_eval_round_trip() {
    let ws = Workspace::new();
    let o = ws.train("m.model", &["epochs=2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("Full\t"));
    let history = std::fs::read_to_string(ws.path("m.history.csv")).unwrap();
    assert_eq!(history.lines().count(), 3);

    let parsed = ws.path("parsed.conllu");
    let o = run(&["parse", s(&ws.path("m.model")), s(&ws.path("dev.conllu")), "--out", s(&parsed)]);
    assert!(o.status.success());
    let sentences = parse_conllu(std::fs::read(&parsed).unwrap().as_slice()).unwrap();
    assert_eq!(sentences.len(), 8);

    let direct = run(&["eval", s(&ws.path("dev.conllu")), s(&parsed)]);
    let via_model = run(&["eval", s(&ws.path("dev.conllu")), "--model", s(&ws.path("m.model"))]);
    assert!(direct.status.success() && via_model.status.success());
    assert_eq!(stdout(&direct), stdout(&via_model));
    assert!(stdout(&direct).starts_with("UAS "));
}

#[test]
fn training_is_deterministic() {
    let ws = Workspace::new();
    assert!(ws.train("a.model", &["epochs=2"]).status.success());
    assert!(ws.train("b.model", &["epochs=2"]).status.success());
    assert_eq!(
        std::fs::read(ws.path("a.model")).unwrap(),
        std::fs::read(ws.path("b.model")).unwrap()
    );
}

#[test]
fn overfit_model_parses_its_training_data_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("tiny.conllu");
    write_conllu_file(&train, &generate(&GrammarConfig::default(), 4, 3)).unwrap();
    let model = dir.path().join("tiny.model");
    let mut args = vec!["train", "--out", s(&model), s(&train), s(&train)];
    for kv in SMALL.iter().chain(&["epochs=150", "dropout=0", "emb_dropout=0", "learning_rate=0.01", "batch_size_sentences=4"]) {
        args.push("--set");
        args.push(kv);
    }
    assert!(run(&args).status.success());
    let parsed = dir.path().join("parsed.conllu");
    assert!(run(&["parse", s(&model), s(&train), "--out", s(&parsed)]).status.success());
    let o = run(&["eval", s(&train), s(&parsed)]);
    assert!(stdout(&o).starts_with("UAS 100.00\tLAS 100.00"), "{}", stdout(&o));
}

#[test]
fn identity_student_matches_teacher_before_training() {
    let ws = Workspace::new();
    assert!(ws.train("t.model", &["epochs=2"]).status.success());
    let (train, dev) = (ws.path("train.conllu"), ws.path("dev.conllu"));
    let student = ws.path("d100.model");
    let o = run(&[
        "distill", "--teacher", s(&ws.path("t.model")), "--fraction", "1.0", "--init-from-teacher",
        "--set", "epochs=0", "--set", "min_freq=1", "--out", s(&student), s(&train), s(&dev),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let teacher_eval = run(&["eval", s(&dev), "--model", s(&ws.path("t.model"))]);
    let student_eval = run(&["eval", s(&dev), "--model", s(&student)]);
    assert_eq!(stdout(&teacher_eval), stdout(&student_eval));
}

#[test]
fn distilled_student_is_tagged_and_smaller() {
    let ws = Workspace::new();
    let teacher_dims = [
        "word_dim=40", "upos_dim=20", "lstm_dim=40", "arc_mlp_dim=40", "label_mlp_dim=20", "epochs=1",
    ];
    assert!(ws.train("t.model", &teacher_dims).status.success());
    let o = run(&[
        "distill", "--teacher", s(&ws.path("t.model")), "--fraction", "0.5", "--set", "epochs=1",
        "--out", s(&ws.path("d.model")), s(&ws.path("train.conllu")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("D-50\t"));
}

#[test]
fn bench_writes_one_row_per_run() {
    let ws = Workspace::new();
    assert!(ws.train("m.model", &["epochs=0"]).status.success());
    let csv = ws.path("bench.csv");
    let o = run(&[
        "bench", s(&ws.path("dev.conllu")), s(&ws.path("m.model")), "--tags", "Full",
        "--batch-sizes", "1,4", "--runs", "3", "--out", s(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("model_tag,batch_size,run,sent_per_s,tok_per_s,wall_s\n"));
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().skip(1).all(|l| l.starts_with("Full,")));
}

#[test]
fn exit_codes() {
    let ws = Workspace::new();
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["eval"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["stats", s(&ws.path("missing.conllu"))]).status.code(), Some(2));
    assert_eq!(ws.train("x.model", &["width=3"]).status.code(), Some(2));
    let bad = ws.path("bad.conllu");
    std::fs::write(&bad, "1\tx\t_\tNOUN\t_\t_\t7\troot\t_\t_\n\n").unwrap();
    let o = run(&["stats", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}
