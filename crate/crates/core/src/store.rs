//! Plain-text model files.
//!
//! Vector files follow the common word-vector text layout:
//!
//! ```text
//! V dim
//! token v1 v2 … vdim
//! ```
//!
//! Values are written with Rust's shortest round-trip float formatting, so a
//! load gives back the exact bits and a second save gives back the exact
//! bytes. Poincaré files prepend `key=value` metadata lines and append the
//! `child<TAB>parent` relation list after the vector block.

use std::collections::HashSet;
use std::io::{self, Read, Write};

use thiserror::Error;

use crate::corpus::{CorpusError, RelationSet, Token, Vocabulary};
use crate::poincare::{PoincareConfig, PoincareError, PoincareModel};
use crate::vectors::{norm_sq, KeyedVectors, Matrix};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("token {0:?} is empty or contains whitespace")]
    InvalidToken(String),
    #[error("header declares {declared} rows but the file has {found}")]
    HeaderMismatch { declared: usize, found: usize },
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: invalid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("point for '{0}' lies outside the ball")]
    BallViolation(String),
    #[error(transparent)]
    Model(#[from] PoincareError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_error(line: usize, message: impl Into<String>) -> StoreError {
    StoreError::ParseError { line, message: message.into() }
}

fn check_token(token: &str) -> Result<(), StoreError> {
    if token.is_empty() || token.chars().any(char::is_whitespace) {
        Err(StoreError::InvalidToken(token.to_owned()))
    } else {
        Ok(())
    }
}

/// Counts bytes on their way to the sink.
struct Counting<W> {
    inner: W,
    written: usize,
}

impl<W: Write> Write for Counting<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.written += n;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

fn write_rows<'a, W: Write>(
    sink: &mut W,
    count: usize,
    dim: usize,
    rows: impl Iterator<Item = (&'a str, &'a [f64])>,
) -> Result<(), StoreError> {
    writeln!(sink, "{count} {dim}")?;
    for (token, values) in rows {
        write!(sink, "{token}")?;
        for v in values {
            write!(sink, " {v}")?;
        }
        sink.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes a vector file and returns the number of bytes written. Tokens are
/// validated before anything is written.
pub fn save_vectors<W: Write>(vectors: &KeyedVectors, sink: W) -> Result<usize, StoreError> {
    for token in vectors.tokens() {
        check_token(token)?;
    }
    let mut sink = Counting { inner: sink, written: 0 };
    write_rows(&mut sink, vectors.len(), vectors.dim(), vectors.iter())?;
    sink.flush()?;
    Ok(sink.written)
}

/// 1-based numbered lines; `str::lines` already drops a trailing `\r`.
type Lines<'a> = std::iter::Peekable<std::vec::IntoIter<(usize, &'a str)>>;

fn numbered(text: &str) -> Lines<'_> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    lines.into_iter().peekable()
}

fn decode(bytes: &[u8]) -> Result<&str, StoreError> {
    std::str::from_utf8(bytes).map_err(|e| {
        let line = 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
        StoreError::InvalidUtf8 { line }
    })
}

fn read_all<R: Read>(mut source: R) -> Result<Vec<u8>, StoreError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    Ok(bytes)
}

fn parse_usize(line: usize, field: &str, what: &str) -> Result<usize, StoreError> {
    field.parse().map_err(|_| parse_error(line, format!("{what} {field:?} is not a non-negative integer")))
}

struct Block {
    tokens: Vec<String>,
    rows: Vec<Vec<f64>>,
    dim: usize,
}

/// Reads the `V dim` header and the `V` rows that follow it.
fn read_rows(lines: &mut Lines<'_>) -> Result<Block, StoreError> {
    let (header_line, header) = lines.next().ok_or_else(|| parse_error(1, "missing 'V dim' header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [count, dim] = fields.as_slice() else {
        return Err(parse_error(header_line, "header must be 'V dim'"));
    };
    let count = parse_usize(header_line, count, "row count")?;
    let dim = parse_usize(header_line, dim, "dimension")?;

    let mut tokens = Vec::with_capacity(count);
    let mut rows = Vec::with_capacity(count);
    let mut seen = HashSet::with_capacity(count);
    while tokens.len() < count {
        let Some((line, text)) = lines.next() else { break };
        let mut fields = text.split(' ');
        let token = fields.next().unwrap_or_default();
        if token.is_empty() {
            return Err(parse_error(line, "row has no token"));
        }
        if !seen.insert(token) {
            return Err(parse_error(line, format!("duplicate token '{token}'")));
        }
        let values = fields
            .map(|f| f.parse::<f64>().map_err(|_| parse_error(line, format!("{f:?} is not a number"))))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != dim {
            return Err(parse_error(line, format!("expected {dim} values, found {}", values.len())));
        }
        tokens.push(token.to_owned());
        rows.push(values);
    }
    if tokens.len() != count {
        return Err(StoreError::HeaderMismatch { declared: count, found: tokens.len() });
    }
    Ok(Block { tokens, rows, dim })
}

pub fn load_vectors<R: Read>(source: R) -> Result<KeyedVectors, StoreError> {
    let bytes = read_all(source)?;
    let mut lines = numbered(decode(&bytes)?);
    let Block { tokens, rows, dim } = read_rows(&mut lines)?;
    let extra = lines.count();
    if extra > 0 {
        return Err(StoreError::HeaderMismatch { declared: tokens.len(), found: tokens.len() + extra });
    }
    let matrix = if rows.is_empty() { Matrix::zeros(0, dim) } else { Matrix::from_rows(&rows) };
    Ok(KeyedVectors::new(tokens, matrix))
}

/// Metadata keys written to Poincaré files, in order. The first three are
/// required on load; the rest fall back to the training defaults.
const REQUIRED_KEYS: [&str; 3] = ["curvature", "eps", "relations"];

pub fn save_poincare<W: Write>(model: &PoincareModel, sink: W) -> Result<usize, StoreError> {
    for entity in model.entities() {
        check_token(entity)?;
    }
    let cfg = model.config();
    let mut sink = Counting { inner: sink, written: 0 };
    writeln!(sink, "curvature={}", cfg.curvature)?;
    writeln!(sink, "eps={}", cfg.eps)?;
    writeln!(sink, "relations={}", model.relations().len())?;
    writeln!(sink, "epochs={}", cfg.epochs)?;
    writeln!(sink, "learning_rate={}", cfg.learning_rate)?;
    writeln!(sink, "negatives={}", cfg.negatives)?;
    writeln!(sink, "burn_in_epochs={}", cfg.burn_in_epochs)?;
    writeln!(sink, "burn_in_lr_factor={}", cfg.burn_in_lr_factor)?;
    writeln!(sink, "seed={}", cfg.seed)?;
    let rows = model.entities().iter().zip(model.points()).map(|(e, p)| (e.as_str(), p.coords()));
    write_rows(&mut sink, model.len(), cfg.dim, rows)?;
    model.relations().write_hyperlex(&mut sink)?;
    sink.flush()?;
    Ok(sink.written)
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, StoreError> {
    value.parse().map_err(|_| parse_error(line, format!("bad value {value:?} for '{key}'")))
}

pub fn load_poincare<R: Read>(source: R) -> Result<PoincareModel, StoreError> {
    let bytes = read_all(source)?;
    let mut lines = numbered(decode(&bytes)?);

    let mut cfg = PoincareConfig::default();
    let mut relation_count = None;
    let mut seen_keys = HashSet::new();
    while let Some(&(line, text)) = lines.peek() {
        let Some((key, value)) = text.split_once('=') else { break };
        lines.next();
        let (key, value) = (key.trim(), value.trim());
        if !seen_keys.insert(key.to_owned()) {
            return Err(parse_error(line, format!("repeated key '{key}'")));
        }
        match key {
            "curvature" => cfg.curvature = parse_value(line, key, value)?,
            "eps" => cfg.eps = parse_value(line, key, value)?,
            "relations" => relation_count = Some(parse_value::<usize>(line, key, value)?),
            "epochs" => cfg.epochs = parse_value(line, key, value)?,
            "learning_rate" => cfg.learning_rate = parse_value(line, key, value)?,
            "negatives" => cfg.negatives = parse_value(line, key, value)?,
            "burn_in_epochs" => cfg.burn_in_epochs = parse_value(line, key, value)?,
            "burn_in_lr_factor" => cfg.burn_in_lr_factor = parse_value(line, key, value)?,
            "seed" => cfg.seed = parse_value(line, key, value)?,
            _ => return Err(parse_error(line, format!("unknown key '{key}'"))),
        }
    }
    let header_line = lines.peek().map_or(1, |&(l, _)| l);
    if let Some(missing) = REQUIRED_KEYS.iter().find(|k| !seen_keys.contains(**k)) {
        return Err(parse_error(header_line, format!("missing metadata key '{missing}'")));
    }
    let relation_count = relation_count.expect("checked above");

    let Block { tokens: entities, rows: points, dim } = read_rows(&mut lines)?;
    cfg.dim = dim;
    cfg.validate()?;
    let limit = 1.0 / cfg.curvature;
    if let Some((entity, _)) =
        entities.iter().zip(&points).find(|(_, p)| norm_sq(p) >= limit || p.iter().any(|x| x.is_nan()))
    {
        return Err(StoreError::BallViolation(entity.clone()));
    }

    let mut pairs = Vec::with_capacity(relation_count);
    for (line, text) in lines {
        let Some((child, parent)) = text.split_once('\t') else {
            return Err(parse_error(line, "relation must be 'child<TAB>parent'"));
        };
        pairs.push((child, parent));
    }
    if pairs.len() != relation_count {
        return Err(parse_error(
            header_line,
            format!("metadata declares {relation_count} relations but the file has {}", pairs.len()),
        ));
    }
    let relations = RelationSet::from_pairs(pairs)?;
    Ok(PoincareModel::from_parts(entities, points, relations, cfg)?)
}

/// Writes `V min_count` followed by one `token count` line per entry.
pub fn save_vocab<W: Write>(vocab: &Vocabulary, sink: W) -> Result<usize, StoreError> {
    let mut sink = Counting { inner: sink, written: 0 };
    writeln!(sink, "{} {}", vocab.len(), vocab.min_count())?;
    for (token, count) in vocab.entries() {
        check_token(token.as_str())?;
        writeln!(sink, "{token} {count}")?;
    }
    sink.flush()?;
    Ok(sink.written)
}

pub fn load_vocab<R: Read>(source: R) -> Result<Vocabulary, StoreError> {
    let bytes = read_all(source)?;
    let mut lines = numbered(decode(&bytes)?);
    let (header_line, header) = lines.next().ok_or_else(|| parse_error(1, "missing 'V min_count' header"))?;
    let Some((count, min_count)) = header.split_once(' ') else {
        return Err(parse_error(header_line, "header must be 'V min_count'"));
    };
    let count = parse_usize(header_line, count, "entry count")?;
    let min_count: u64 = parse_value(header_line, "min_count", min_count)?;
    let mut entries = Vec::with_capacity(count);
    for (line, text) in lines {
        let Some((token, n)) = text.split_once(' ') else {
            return Err(parse_error(line, "entry must be 'token count'"));
        };
        let parsed = Token::new(token).filter(|t| t.as_str() == token);
        let parsed = parsed.ok_or_else(|| parse_error(line, format!("{token:?} is not a normalized token")))?;
        entries.push((parsed, parse_value(line, "count", n)?));
    }
    if entries.len() != count {
        return Err(StoreError::HeaderMismatch { declared: count, found: entries.len() });
    }
    Ok(Vocabulary::from_entries(entries, min_count)?)
}
