use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser as ClapParser, Subcommand};
use depdistill::bench::{bench_speed, format_summary_table, summarize, write_bench_csv};
use depdistill::conllu::{
    build_vocab, load_embeddings, read_conllu_file, treebank_stats, write_conllu, write_stats_csv, ArcConvention,
    Sentence,
};
use depdistill::eval::{pair_up, uas_las, write_eval_csv, EvalRecord};
use depdistill::model::{load_model, save_model, size_student, Parser};
use depdistill::training::{student_from, train_parser, write_history_csv, RunConfig, TrainOutcome};
use depdistill::Error;
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(ClapParser)]
#[command(name = "depdistill", version, about = "Biaffine dependency parsing with teacher-student distillation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a parser on gold trees (Full, or B-π with --fraction).
    Train(TrainArgs),
    /// Train a student D-π against a frozen teacher.
    Distill(DistillArgs),
    /// Annotate CoNLL-U input with predicted heads and relations.
    Parse(ParseArgs),
    /// Attachment scores of predictions against gold trees.
    Eval(EvalArgs),
    /// Parsing throughput over a batch-size sweep.
    Bench(BenchArgs),
    /// Treebank statistics.
    Stats(StatsArgs),
}

#[derive(Args)]
struct RunArgs {
    /// File of `key = value` model and training settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Setting override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Where to write the model.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch history CSV; defaults to the model path with `.history.csv`.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Training CoNLL-U file.
    train: PathBuf,
    /// Development CoNLL-U file for checkpoint selection.
    dev: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Shrink the full configuration to this parameter fraction.
    #[arg(long)]
    fraction: Option<f64>,
    /// Pre-trained word vectors, one `word v1 … vd` per line.
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

#[derive(Args)]
struct DistillArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    teacher: PathBuf,
    /// Student parameter fraction of the teacher, in (0, 1].
    #[arg(long)]
    fraction: f64,
    /// Start from the teacher's weights (requires --fraction 1).
    #[arg(long)]
    init_from_teacher: bool,
}

#[derive(Args)]
struct ParseArgs {
    model: PathBuf,
    input: PathBuf,
    /// Output CoNLL-U; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    single_root: bool,
}

#[derive(Args)]
struct EvalArgs {
    gold: PathBuf,
    /// Predicted CoNLL-U; with --model the gold file is parsed instead.
    predicted: Option<PathBuf>,
    #[arg(long, conflicts_with = "predicted")]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    include_punct: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    single_root: bool,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    /// CSV of the result.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Model tag for the CSV; defaults to the model or prediction file stem.
    #[arg(long)]
    tag: Option<String>,
}

#[derive(Args)]
struct BenchArgs {
    /// CoNLL-U corpus to parse.
    input: PathBuf,
    /// Model files to time.
    #[arg(required = true)]
    models: Vec<PathBuf>,
    /// One tag per model; defaults to the file stems.
    #[arg(long, value_delimiter = ',')]
    tags: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1,32,64,128,256,512")]
    batch_sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    single_root: bool,
    /// Record CSV; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(required = true)]
    treebanks: Vec<PathBuf>,
    /// Count arcs from the root in arc-length and non-projectivity figures.
    #[arg(long)]
    include_root_arcs: bool,
    /// CSV output; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn percent_tag(prefix: &str, fraction: f64) -> String {
    format!("{}-{}", prefix, (fraction * 100.0).round() as u64)
}

fn output(path: Option<&Path>) -> depdistill::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_run_config(run: &RunArgs) -> depdistill::Result<RunConfig> {
    let mut config = match &run.config {
        Some(p) => RunConfig::read(p)?,
        None => RunConfig::default(),
    };
    for o in &run.overrides {
        config.apply_override(o)?;
    }
    if let Some(seed) = run.seed {
        config.hyper.seed = seed;
    }
    config.hyper.validate()?;
    Ok(config)
}

fn read_data(run: &RunArgs) -> depdistill::Result<(Vec<Sentence>, Vec<Sentence>)> {
    let train = read_conllu_file(&run.train)?;
    let dev = match &run.dev {
        Some(p) => read_conllu_file(p)?,
        None => Vec::new(),
    };
    info!("{} training and {} development sentences", train.len(), dev.len());
    Ok((train, dev))
}

fn finish(run: &RunArgs, tag: &str, outcome: &TrainOutcome) -> depdistill::Result<()> {
    save_model(&run.out, &outcome.parser)?;
    let history = run.history.clone().unwrap_or_else(|| run.out.with_extension("history.csv"));
    write_history_csv(File::create(&history)?, &outcome.history)?;
    let last = outcome.history.last();
    println!(
        "{}\tparams {}\tbest epoch {}\tdev UAS {:.2}\tdev LAS {:.2}",
        tag,
        outcome.parser.param_count(),
        outcome.best_epoch.map_or("-".to_string(), |e| e.to_string()),
        last.map_or(f64::NAN, |r| r.dev_uas),
        last.map_or(f64::NAN, |r| r.dev_las),
    );
    Ok(())
}

fn train(args: &TrainArgs) -> depdistill::Result<()> {
    let config = load_run_config(&args.run)?;
    let (train, dev) = read_data(&args.run)?;
    let vocab = build_vocab(&train, config.hyper.min_freq);
    let mut model = config.model.clone();
    model.word_vocab_size = vocab.word_count();
    model.upos_vocab_size = vocab.upos_count();
    model.label_count = vocab.label_count();
    let tag = match args.fraction {
        Some(f) => {
            model = size_student(&model, f)?;
            percent_tag("B", f)
        }
        None => "Full".to_string(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.hyper.seed);
    let mut parser = Parser::new(model, vocab, &mut rng)?;
    if let Some(path) = &args.embeddings {
        let emb = load_embeddings(
            BufReader::new(File::open(path)?),
            &parser.vocab,
            parser.config.word_dim,
            &mut rng,
        )?;
        if !parser.attach_embeddings(&emb.matrix) {
            return Err(Error::Config("embedding matrix does not fit the model".into()));
        }
        info!("pre-trained vectors cover {:.1}% of the vocabulary", 100.0 * emb.coverage);
    }
    info!("training {} with {} parameters", tag, parser.param_count());
    let outcome = train_parser(parser, None, &train, &dev, &config.hyper, None)?;
    finish(&args.run, &tag, &outcome)
}

fn distill(args: &DistillArgs) -> depdistill::Result<()> {
    let config = load_run_config(&args.run)?;
    let teacher = load_model(&args.teacher)?;
    let (train, dev) = read_data(&args.run)?;
    let student_config = size_student(&teacher.config, args.fraction)?;
    let student = student_from(&teacher, &student_config, &config.hyper, args.init_from_teacher)?;
    let tag = percent_tag("D", args.fraction);
    info!(
        "distilling {} with {} parameters from a {}-parameter teacher",
        tag,
        student.param_count(),
        teacher.param_count()
    );
    let outcome = train_parser(student, Some(&teacher), &train, &dev, &config.hyper, None)?;
    finish(&args.run, &tag, &outcome)
}

fn parse(args: &ParseArgs) -> depdistill::Result<()> {
    let parser = load_model(&args.model)?;
    let input = read_conllu_file(&args.input)?;
    let annotated = parser.annotate(&input, args.batch_size, args.single_root)?;
    let mut out = output(args.out.as_deref())?;
    write_conllu(&mut out, &annotated)?;
    out.flush()?;
    Ok(())
}

fn eval(args: &EvalArgs) -> depdistill::Result<()> {
    let gold = read_conllu_file(&args.gold)?;
    let (predicted, default_tag) = match (&args.predicted, &args.model) {
        (Some(p), None) => (read_conllu_file(p)?, stem(p)),
        (None, Some(m)) => {
            let parser = load_model(m)?;
            (parser.annotate(&gold, args.batch_size, args.single_root)?, stem(m))
        }
        _ => return Err(Error::InvalidArgument("give either a predicted file or --model".into())),
    };
    let scores = uas_las(&pair_up(&gold, &predicted)?, args.include_punct)?;
    println!("UAS {:.2}\tLAS {:.2}\ttokens {}", scores.uas, scores.las, scores.tokens);
    if let Some(path) = &args.out {
        let record = EvalRecord {
            model_tag: args.tag.clone().unwrap_or(default_tag),
            treebank: stem(&args.gold),
            uas: scores.uas,
            las: scores.las,
        };
        write_eval_csv(File::create(path)?, &[record])?;
    }
    Ok(())
}

fn bench(args: &BenchArgs) -> depdistill::Result<()> {
    if !args.tags.is_empty() && args.tags.len() != args.models.len() {
        return Err(Error::InvalidArgument("give one tag per model".into()));
    }
    let corpus = read_conllu_file(&args.input)?;
    let mut records = Vec::new();
    for (i, path) in args.models.iter().enumerate() {
        let tag = args.tags.get(i).cloned().unwrap_or_else(|| stem(path));
        let parser = load_model(path)?;
        info!("timing {} ({} parameters)", tag, parser.param_count());
        records.extend(bench_speed(&parser, &tag, &corpus, &args.batch_sizes, args.runs, args.single_root)?);
    }
    if records.iter().any(|r| r.degenerate) {
        warn!("some batch sizes exceed the corpus size");
    }
    let mut out = output(args.out.as_deref())?;
    write_bench_csv(&mut out, &records)?;
    out.flush()?;
    eprint!("{}", format_summary_table(&summarize(&records)));
    Ok(())
}

fn stats(args: &StatsArgs) -> depdistill::Result<()> {
    let convention = if args.include_root_arcs {
        ArcConvention::IncludeRoot
    } else {
        ArcConvention::ExcludeRoot
    };
    let mut rows = Vec::new();
    for path in &args.treebanks {
        let sentences = read_conllu_file(path)?;
        rows.push((stem(path), treebank_stats(&sentences, convention)?));
    }
    let mut out = output(args.out.as_deref())?;
    write_stats_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Train(a) => train(a),
        Command::Distill(a) => distill(a),
        Command::Parse(a) => parse(a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
