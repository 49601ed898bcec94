//! Model files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes  "DEPDSTL\0"
//! version  u32      currently 1
//! config   u64 byte length, then UTF-8 `key = value` lines
//! vocab    three lists (words, UPOS tags, labels), each a u64 count
//!          followed by u64-length-prefixed UTF-8 strings
//! tensors  u64 count, then per tensor: u64-length-prefixed name,
//!          u64 rank, rank × u64 dims, product(dims) × f64
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::config::ModelConfig;
use super::network::Parser;
use crate::autodiff::{ParamSet, Tensor};
use crate::conllu::Vocab;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DEPDSTL\0";
pub const FORMAT_VERSION: u32 = 1;

fn put_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    put_u64(w, s.len() as u64)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub fn write_model<W: Write>(mut w: W, parser: &Parser) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    put_str(&mut w, &parser.config.to_key_values())?;
    for list in [parser.vocab.words(), parser.vocab.upos_tags(), parser.vocab.labels()] {
        put_u64(&mut w, list.len() as u64)?;
        for item in list {
            put_str(&mut w, item)?;
        }
    }
    put_u64(&mut w, parser.params.len() as u64)?;
    for (name, t) in parser.params.iter() {
        put_str(&mut w, name)?;
        put_u64(&mut w, t.shape().len() as u64)?;
        for &d in t.shape() {
            put_u64(&mut w, d as u64)?;
        }
        let mut bytes = Vec::with_capacity(t.len() * 8);
        for v in t.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&bytes)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_model(path: impl AsRef<Path>, parser: &Parser) -> Result<()> {
    write_model(BufWriter::new(File::create(path)?), parser)
}

struct Source<R> {
    inner: R,
}

impl<R: Read> Source<R> {
    fn bytes(&mut self, n: usize, what: &str) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        (&mut self.inner).take(n as u64).read_to_end(&mut buf)?;
        if buf.len() != n {
            return Err(Error::Load(format!("file truncated while reading {}", what)));
        }
        Ok(buf)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        let b = self.bytes(8, what)?;
        Ok(u64::from_le_bytes(b.try_into().unwrap()))
    }

    // Lengths are bounded so that a corrupt count cannot request an
    // enormous allocation before the truncation is noticed.
    fn len(&mut self, what: &str, limit: u64) -> Result<usize> {
        let n = self.u64(what)?;
        if n > limit {
            return Err(Error::Load(format!("implausible {} {}", what, n)));
        }
        Ok(n as usize)
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let n = self.len(what, 1 << 30)?;
        String::from_utf8(self.bytes(n, what)?).map_err(|_| Error::Load(format!("{} is not UTF-8", what)))
    }
}

pub fn read_model<R: Read>(reader: R) -> Result<Parser> {
    let mut src = Source { inner: reader };
    if src.bytes(8, "magic")?.as_slice() != MAGIC {
        return Err(Error::Load("not a model file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(src.bytes(4, "version")?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Load(format!(
            "format version {} is not supported (expected {})",
            version, FORMAT_VERSION
        )));
    }
    let config = ModelConfig::from_key_values(&src.string("config")?).map_err(|e| Error::Load(e.to_string()))?;
    let mut lists = Vec::new();
    for what in ["words", "upos tags", "labels"] {
        let n = src.len(what, 1 << 32)?;
        lists.push((0..n).map(|_| src.string(what)).collect::<Result<Vec<_>>>()?);
    }
    let labels = lists.pop().unwrap();
    let upos = lists.pop().unwrap();
    let words = lists.pop().unwrap();
    let vocab = Vocab::from_lists(words, upos, labels).map_err(|e| Error::Load(e.to_string()))?;

    let count = src.len("tensor count", 1 << 20)?;
    let mut params = ParamSet::new();
    for _ in 0..count {
        let name = src.string("tensor name")?;
        let rank = src.len("tensor rank", 8)?;
        let shape = (0..rank)
            .map(|_| src.len("tensor dimension", 1 << 40))
            .collect::<Result<Vec<_>>>()?;
        let n: usize = shape.iter().product();
        let raw = src.bytes(n * 8, &name)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        params.push(name, Tensor::new(shape, data)?);
    }
    let mut rest = Vec::new();
    src.inner.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Load(format!("{} trailing bytes", rest.len())));
    }
    Parser::from_parts(config, vocab, params).map_err(|e| Error::Load(e.to_string()))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Parser> {
    read_model(BufReader::new(File::open(path)?))
}
