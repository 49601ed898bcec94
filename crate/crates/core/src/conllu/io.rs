use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::sentence::{check_tree, Sentence};
use crate::error::{Error, Result};

/// Reads sentences from CoNLL-U text.
///
/// Multiword-token ranges (`1-2`) and empty nodes (`1.1`) are skipped. Only
/// FORM, UPOS, HEAD and DEPREL are retained, plus comment lines.
pub fn parse_conllu<R: BufRead>(reader: R) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut current = Sentence::default();
    let mut start_line = 1;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            finish(&mut sentences, &mut current, start_line)?;
            start_line = line_no + 1;
            continue;
        }
        if current.tokens.is_empty() && current.comments.is_empty() {
            start_line = line_no;
        }
        if let Some(comment) = line.strip_prefix('#') {
            current.comments.push(comment.to_string());
            continue;
        }

        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 10 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 10 tab-separated columns, found {}", fields.len()),
            });
        }
        let id = fields[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let id: usize = id.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid token id '{}'", id),
        })?;
        if id != current.tokens.len() + 1 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected token id {}, found {}", current.tokens.len() + 1, id),
            });
        }
        let head: usize = fields[6].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("non-integer HEAD '{}'", fields[6]),
        })?;
        current.tokens.push(fields[1].to_string());
        current.upos.push(fields[3].to_string());
        current.heads.push(head);
        current.labels.push(fields[7].to_string());
    }
    finish(&mut sentences, &mut current, start_line)?;
    Ok(sentences)
}

fn finish(sentences: &mut Vec<Sentence>, current: &mut Sentence, start_line: usize) -> Result<()> {
    let sentence = std::mem::take(current);
    if sentence.tokens.is_empty() {
        return Ok(());
    }
    check_tree(&sentence.heads).map_err(|message| Error::Parse {
        line: start_line,
        message: format!("sentence starting here: {}", message),
    })?;
    sentences.push(sentence);
    Ok(())
}

pub fn read_conllu_file(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    let file = File::open(path)?;
    parse_conllu(BufReader::new(file))
}

/// Writes sentences as CoNLL-U; columns that are not retained are `_`.
pub fn write_conllu<W: Write>(mut writer: W, sentences: &[Sentence]) -> Result<()> {
    for sentence in sentences {
        for comment in &sentence.comments {
            writeln!(writer, "#{}", comment)?;
        }
        for i in 0..sentence.len() {
            writeln!(
                writer,
                "{}\t{}\t_\t{}\t_\t_\t{}\t{}\t_\t_",
                i + 1,
                sentence.tokens[i],
                sentence.upos[i],
                sentence.heads[i],
                sentence.labels[i]
            )?;
        }
        writeln!(writer)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_conllu_file(path: impl AsRef<Path>, sentences: &[Sentence]) -> Result<()> {
    let file = File::create(path)?;
    write_conllu(BufWriter::new(file), sentences)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::conllu::io_fixture::FIG1;

    #[test]
    fn reads_dependency_example() {
        let s = parse_conllu(FIG1.as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].heads, vec![2, 6, 5, 5, 2, 0, 8, 6]);
        assert_eq!(
            s[0].labels,
            vec!["det", "nsubj", "case", "det", "nmod", "root", "det", "obj"]
        );
        assert_eq!(s[0].upos[5], "VERB");
    }

    #[test]
    fn empty_input() {
        assert!(parse_conllu("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn cycle_is_rejected_with_line() {
        let text = "\n1\ta\t_\tX\t_\t_\t2\tdep\t_\t_\n2\tb\t_\tX\t_\t_\t1\tdep\t_\t_\n";
        match parse_conllu(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn bad_head_is_rejected() {
        let text = "1\ta\t_\tX\t_\t_\tx\tdep\t_\t_\n";
        assert!(matches!(
            parse_conllu(text.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        let text = "1\ta\t_\tX\t_\t_\t0\troot\t_\t_\n2\tb\t_\tX\t_\t_\t7\tdep\t_\t_\n";
        assert!(matches!(parse_conllu(text.as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn skips_multiword_and_empty_nodes() {
        let text = "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_
1\tde\t_\tADP\t_\t_\t2\tcase\t_\t_
2\tel\t_\tDET\t_\t_\t0\troot\t_\t_
2.1\tx\t_\tX\t_\t_\t_\t_\t2:dep\t_
";
        let s = parse_conllu(text.as_bytes()).unwrap();
        assert_eq!(s[0].tokens, vec!["de", "el"]);
    }

    fn arb_sentence() -> impl Strategy<Value = Sentence> {
        (1usize..8).prop_flat_map(|n| {
            // Attach each token to an earlier position: always a tree.
            let heads = (0..n).map(|i| 0..=i).collect::<Vec<_>>();
            (
                proptest::collection::vec("[a-z]{1,6}", n),
                proptest::collection::vec(prop::sample::select(vec!["NOUN", "VERB", "DET"]), n),
                heads,
                proptest::collection::vec(prop::sample::select(vec!["dep", "obj", "nsubj"]), n),
            )
                .prop_map(|(tokens, upos, heads, labels)| Sentence {
                    comments: vec![" sent_id = x".to_string()],
                    tokens,
                    upos: upos.into_iter().map(String::from).collect(),
                    heads,
                    labels: labels.into_iter().map(String::from).collect(),
                })
        })
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(sentences in proptest::collection::vec(arb_sentence(), 0..5)) {
            let mut buf = Vec::new();
            write_conllu(&mut buf, &sentences).unwrap();
            let back = parse_conllu(buf.as_slice()).unwrap();
            prop_assert_eq!(back, sentences);
        }
    }
}
