//! Single-core parsing throughput.
//!
//! A measurement covers one full inference pass over the corpus: batching,
//! encoding, scoring, Chu-Liu/Edmonds decoding and labelling. Model loading
//! and file parsing happen before the clock starts. All computation runs on
//! the calling thread.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::Instant;

use log::warn;

use crate::conllu::Sentence;
use crate::error::{Error, Result};
use crate::model::Parser;

/// Timings include tree decoding, not only the network forward pass.
pub const TIMING_INCLUDES_DECODING: bool = true;

/// One timed pass of a model at a batch size.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub model_tag: String,
    pub batch_size: usize,
    pub run: usize,
    pub sent_per_s: f64,
    pub tok_per_s: f64,
    pub wall_s: f64,
    /// The batch size exceeded the corpus, so the pass was a single batch.
    pub degenerate: bool,
    pub includes_decoding: bool,
}

/// Source of monotonic time in seconds.
pub trait Clock {
    fn now(&mut self) -> f64;
}

pub struct MonotonicClock(Instant);

impl Default for MonotonicClock {
    fn default() -> Self {
        MonotonicClock(Instant::now())
    }
}

impl Clock for MonotonicClock {
    fn now(&mut self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Times `runs` full parses of `sentences` per batch size.
pub fn bench_speed(
    parser: &Parser,
    model_tag: &str,
    sentences: &[Sentence],
    batch_sizes: &[usize],
    runs: usize,
    single_root: bool,
) -> Result<Vec<BenchRecord>> {
    bench_speed_with_clock(
        parser,
        model_tag,
        sentences,
        batch_sizes,
        runs,
        single_root,
        &mut MonotonicClock::default(),
    )
}

pub fn bench_speed_with_clock(
    parser: &Parser,
    model_tag: &str,
    sentences: &[Sentence],
    batch_sizes: &[usize],
    runs: usize,
    single_root: bool,
    clock: &mut dyn Clock,
) -> Result<Vec<BenchRecord>> {
    if sentences.is_empty() {
        return Err(Error::invalid("benchmark corpus is empty"));
    }
    if runs == 0 || batch_sizes.contains(&0) {
        return Err(Error::invalid("runs and batch sizes must be positive"));
    }
    let tokens: usize = sentences.iter().map(Sentence::len).sum();
    let mut records = Vec::with_capacity(batch_sizes.len() * runs);
    for &batch_size in batch_sizes {
        let degenerate = batch_size > sentences.len();
        if degenerate {
            warn!(
                "batch size {} exceeds the {} sentences; timing a single batch",
                batch_size,
                sentences.len()
            );
        }
        for run in 1..=runs {
            let start = clock.now();
            let trees = parser.parse(sentences, batch_size, single_root)?;
            let stop = clock.now();
            debug_assert_eq!(trees.len(), sentences.len());
            let wall = (stop - start).max(f64::MIN_POSITIVE);
            records.push(BenchRecord {
                model_tag: model_tag.to_string(),
                batch_size,
                run,
                sent_per_s: sentences.len() as f64 / wall,
                tok_per_s: tokens as f64 / wall,
                wall_s: wall,
                degenerate,
                includes_decoding: TIMING_INCLUDES_DECODING,
            });
        }
    }
    Ok(records)
}

const HEADER: [&str; 6] = ["model_tag", "batch_size", "run", "sent_per_s", "tok_per_s", "wall_s"];

pub fn write_bench_csv<W: Write>(writer: W, records: &[BenchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.model_tag.clone(),
            r.batch_size.to_string(),
            r.run.to_string(),
            format!("{:?}", r.sent_per_s),
            format!("{:?}", r.tok_per_s),
            format!("{:?}", r.wall_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads records written by [`write_bench_csv`]. The degenerate flag is
/// not stored and reads back as `false`.
pub fn read_bench_csv<R: Read>(reader: R) -> Result<Vec<BenchRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let field = |k: usize| row.get(k).unwrap_or("");
        let bad = |k: usize| Error::Format {
            line,
            message: format!("bad value '{}' in column {}", field(k), HEADER[k]),
        };
        out.push(BenchRecord {
            model_tag: field(0).to_string(),
            batch_size: field(1).parse().map_err(|_| bad(1))?,
            run: field(2).parse().map_err(|_| bad(2))?,
            sent_per_s: field(3).parse().map_err(|_| bad(3))?,
            tok_per_s: field(4).parse().map_err(|_| bad(4))?,
            wall_s: field(5).parse().map_err(|_| bad(5))?,
            degenerate: false,
            includes_decoding: TIMING_INCLUDES_DECODING,
        });
    }
    Ok(out)
}

/// Mean and standard error (sample standard deviation over √runs).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSummary {
    pub model_tag: String,
    pub batch_size: usize,
    pub runs: usize,
    pub tok_per_s: (f64, f64),
    pub sent_per_s: (f64, f64),
}

/// Groups records by (model, batch size) in first-seen order.
pub fn summarize(records: &[BenchRecord]) -> Vec<BenchSummary> {
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in records {
        let k = (r.model_tag.clone(), r.batch_size);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(tag, bs)| {
            let group: Vec<&BenchRecord> = records
                .iter()
                .filter(|r| r.model_tag == tag && r.batch_size == bs)
                .collect();
            let tok: Vec<f64> = group.iter().map(|r| r.tok_per_s).collect();
            let sent: Vec<f64> = group.iter().map(|r| r.sent_per_s).collect();
            BenchSummary {
                model_tag: tag,
                batch_size: bs,
                runs: group.len(),
                tok_per_s: mean_and_se(&tok),
                sent_per_s: mean_and_se(&sent),
            }
        })
        .collect()
}

/// A text table with one tok/s row and one sent/s row per model and one
/// column per batch size, each cell `mean ± se`.
pub fn format_summary_table(summaries: &[BenchSummary]) -> String {
    let mut models: Vec<&str> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for s in summaries {
        if !models.contains(&s.model_tag.as_str()) {
            models.push(&s.model_tag);
        }
        if !sizes.contains(&s.batch_size) {
            sizes.push(s.batch_size);
        }
    }
    let mut out = String::new();
    write!(out, "{:<10} {:<7}", "model", "unit").unwrap();
    for b in &sizes {
        write!(out, " {:>22}", format!("batch {}", b)).unwrap();
    }
    out.push('\n');
    for m in models {
        for (unit, pick) in [
            ("tok/s", (|s: &BenchSummary| s.tok_per_s) as fn(&BenchSummary) -> (f64, f64)),
            ("sent/s", |s: &BenchSummary| s.sent_per_s),
        ] {
            write!(out, "{:<10} {:<7}", m, unit).unwrap();
            for b in &sizes {
                let cell = summaries
                    .iter()
                    .find(|s| s.model_tag == m && s.batch_size == *b)
                    .map(|s| {
                        let (mean, se) = pick(s);
                        format!("{:.1} ± {:.1}", mean, se)
                    })
                    .unwrap_or_else(|| "-".into());
                write!(out, " {:>22}", cell).unwrap();
            }
            out.push('\n');
        }
    }
    out
}
