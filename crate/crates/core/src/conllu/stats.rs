use std::io::Write;

use super::sentence::Sentence;
use crate::error::{Error, Result};

/// Whether arcs from the artificial root take part in arc-length and
/// non-projectivity statistics. The root has no linear position, so the
/// default leaves those arcs out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ArcConvention {
    #[default]
    ExcludeRoot,
    /// Root arcs count, with the root placed at position 0.
    IncludeRoot,
}

impl ArcConvention {
    fn suffix(self) -> &'static str {
        match self {
            ArcConvention::ExcludeRoot => "excl_root",
            ArcConvention::IncludeRoot => "incl_root",
        }
    }
}

/// Treebank properties that relate to parsing difficulty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreebankStats {
    pub tree_count: usize,
    pub avg_sent_length: f64,
    pub avg_arc_length: f64,
    pub nonproj_pct: f64,
    pub convention: ArcConvention,
}

fn crosses(a: (usize, usize), b: (usize, usize)) -> bool {
    let (a0, a1) = (a.0.min(a.1), a.0.max(a.1));
    let (b0, b1) = (b.0.min(b.1), b.0.max(b.1));
    (a0 < b0 && b0 < a1 && a1 < b1) || (b0 < a0 && a0 < b1 && b1 < a1)
}

/// Number of arcs of a sentence that cross another arc, and the number of
/// arcs considered.
pub(crate) fn nonprojective_arcs(heads: &[usize], convention: ArcConvention) -> (usize, usize) {
    let arcs: Vec<(usize, usize)> = heads
        .iter()
        .enumerate()
        .filter(|(_, &h)| h != 0 || convention == ArcConvention::IncludeRoot)
        .map(|(i, &h)| (h, i + 1))
        .collect();
    let crossing = arcs
        .iter()
        .enumerate()
        .filter(|(i, &a)| {
            arcs.iter()
                .enumerate()
                .any(|(j, &b)| *i != j && crosses(a, b))
        })
        .count();
    (crossing, arcs.len())
}

pub fn treebank_stats(sentences: &[Sentence], convention: ArcConvention) -> Result<TreebankStats> {
    if sentences.is_empty() {
        return Err(Error::invalid("statistics of an empty treebank"));
    }
    let tokens: usize = sentences.iter().map(Sentence::len).sum();
    let mut arc_length_sum = 0usize;
    let mut arc_count = 0usize;
    let mut nonproj = 0usize;
    for s in sentences {
        for (i, &h) in s.heads.iter().enumerate() {
            if h == 0 && convention == ArcConvention::ExcludeRoot {
                continue;
            }
            arc_length_sum += (i + 1).abs_diff(h);
            arc_count += 1;
        }
        nonproj += nonprojective_arcs(&s.heads, convention).0;
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(TreebankStats {
        tree_count: sentences.len(),
        avg_sent_length: tokens as f64 / sentences.len() as f64,
        avg_arc_length: ratio(arc_length_sum, arc_count),
        nonproj_pct: 100.0 * ratio(nonproj, arc_count),
        convention,
    })
}

/// Writes a header and one row per treebank, columns in the order trees,
/// sentence length, arc length, non-projective percentage. The header names
/// the root-arc convention.
pub fn write_stats_csv<W: Write>(writer: W, rows: &[(String, TreebankStats)]) -> Result<()> {
    let convention = rows.first().map(|r| r.1.convention).unwrap_or_default();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "treebank".to_string(),
        "trees".to_string(),
        "avg_sent_len".to_string(),
        format!("avg_arc_len_{}", convention.suffix()),
        format!("nonproj_pct_{}", convention.suffix()),
    ])?;
    for (name, s) in rows {
        w.write_record([
            name.clone(),
            s.tree_count.to_string(),
            format!("{:.2}", s.avg_sent_length),
            format!("{:.2}", s.avg_arc_length),
            format!("{:.2}", s.nonproj_pct),
        ])?;
    }
    w.flush()?;
    Ok(())
}
