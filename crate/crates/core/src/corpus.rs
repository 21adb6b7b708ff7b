//! Text ingestion: tokenization, vocabulary, co-occurrence counting and
//! HyperLex relation files.
//!
//! Everything here is a pure function over its inputs. Surfaces are kept in
//! NFC so that tokens such as `nɔví` or `abô` survive a write/read cycle
//! byte for byte.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("empty vocabulary: no token reaches the minimum count of {min_count}")]
    EmptyVocabulary { min_count: u64 },
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("window must be at least 1")]
    InvalidWindow,
    #[error("line {0}: expected at least a child and a parent field")]
    MalformedLine(usize),
    #[error("line {0}: an entity cannot be related to itself")]
    SelfRelation(usize),
    #[error("input is not valid UTF-8: {0}")]
    InvalidUtf8(#[from] std::str::Utf8Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A single NFC-normalized surface form without whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    /// Builds a token from a raw surface. Returns `None` for empty or
    /// whitespace-bearing input.
    pub fn new(surface: &str) -> Option<Token> {
        let surface: String = surface.nfc().collect();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return None;
        }
        Some(Token(surface))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Splits `text` on Unicode whitespace, trims punctuation from both ends of
/// each piece and NFC-normalizes the result. Case is kept unless `lowercase`.
pub fn tokenize(text: &str, lowercase: bool) -> Vec<Token> {
    text.split_whitespace()
        .filter_map(|raw| {
            let normalized: String = raw.nfc().collect();
            let trimmed = normalized.trim_matches(is_punctuation);
            if trimmed.is_empty() {
                return None;
            }
            if lowercase {
                Token::new(&trimmed.to_lowercase())
            } else {
                Token::new(trimmed)
            }
        })
        .collect()
}

/// Tokenizes one sentence per line. Lines that yield no tokens are dropped.
pub fn tokenize_lines(text: &str, lowercase: bool) -> Vec<Vec<Token>> {
    text.lines().map(|line| tokenize(line, lowercase)).filter(|sentence| !sentence.is_empty()).collect()
}

/// Token ↔ id map with corpus frequencies. Ids follow first occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    entries: Vec<(Token, u64)>,
    index: HashMap<String, usize>,
    min_count: u64,
}

impl Vocabulary {
    pub fn build<S: AsRef<[Token]>>(sentences: &[S], min_count: u64) -> Result<Self, CorpusError> {
        if min_count == 0 {
            return Err(CorpusError::InvalidMinCount);
        }
        let mut order: Vec<&Token> = Vec::new();
        let mut counts: HashMap<&Token, u64> = HashMap::new();
        for token in sentences.iter().flat_map(|s| s.as_ref().iter()) {
            let count = counts.entry(token).or_insert(0);
            if *count == 0 {
                order.push(token);
            }
            *count += 1;
        }
        let entries: Vec<(Token, u64)> =
            order.into_iter().map(|t| (t.clone(), counts[t])).filter(|(_, c)| *c >= min_count).collect();
        Self::from_entries(entries, min_count)
    }

    /// Rebuilds a vocabulary from stored `(token, count)` entries in id order.
    pub fn from_entries(entries: Vec<(Token, u64)>, min_count: u64) -> Result<Self, CorpusError> {
        if min_count == 0 {
            return Err(CorpusError::InvalidMinCount);
        }
        if entries.is_empty() || entries.iter().any(|(_, c)| *c < min_count) {
            return Err(CorpusError::EmptyVocabulary { min_count });
        }
        let index = entries.iter().enumerate().map(|(id, (t, _))| (t.as_str().to_owned(), id)).collect();
        Ok(Vocabulary { entries, index, min_count })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &Token {
        &self.entries[id].0
    }

    pub fn count(&self, id: usize) -> u64 {
        self.entries[id].1
    }

    pub fn entries(&self) -> &[(Token, u64)] {
        &self.entries
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    pub fn find_matching_terms(&self, query: &str) -> Vec<String> {
        find_matching_terms(self.tokens(), query)
    }
}

/// Sentences as id sequences over a [`Vocabulary`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    sentences: Vec<Vec<usize>>,
    total_tokens: usize,
}

impl Corpus {
    /// Maps tokens to ids, dropping out-of-vocabulary tokens and any
    /// sentence left empty.
    pub fn from_tokens<S: AsRef<[Token]>>(vocab: &Vocabulary, sentences: &[S]) -> Corpus {
        let sentences: Vec<Vec<usize>> = sentences
            .iter()
            .map(|s| s.as_ref().iter().filter_map(|t| vocab.id(t.as_str())).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect();
        let total_tokens = sentences.iter().map(Vec::len).sum();
        Corpus { sentences, total_tokens }
    }

    /// Builds directly from id sequences. Empty sentences are dropped.
    pub fn from_ids(sentences: Vec<Vec<usize>>) -> Corpus {
        let sentences: Vec<Vec<usize>> = sentences.into_iter().filter(|s| !s.is_empty()).collect();
        let total_tokens = sentences.iter().map(Vec::len).sum();
        Corpus { sentences, total_tokens }
    }

    pub fn sentences(&self) -> &[Vec<usize>] {
        &self.sentences
    }

    pub fn total_tokens(&self) -> usize {
        self.total_tokens
    }

    /// One past the largest id in use; 0 for an empty corpus.
    pub fn id_bound(&self) -> usize {
        self.sentences.iter().flatten().map(|&i| i + 1).max().unwrap_or(0)
    }
}

/// Sparse symmetric word-word co-occurrence weights with cached row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceMatrix {
    size: usize,
    entries: Vec<(usize, usize, f64)>,
    row_sums: Vec<f64>,
}

impl CooccurrenceMatrix {
    /// Counts every in-sentence pair at offset `1..=window`. Each pair adds
    /// weight 1 (or `1/offset` with `distance_weighting`) to both `(t, t')`
    /// and `(t', t)`.
    pub fn build(
        corpus: &Corpus,
        vocab_size: usize,
        window: usize,
        distance_weighting: bool,
    ) -> Result<Self, CorpusError> {
        if window == 0 {
            return Err(CorpusError::InvalidWindow);
        }
        let size = vocab_size.max(corpus.id_bound());
        let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for sentence in corpus.sentences() {
            for (i, &t) in sentence.iter().enumerate() {
                for offset in 1..=window {
                    let Some(&u) = sentence.get(i + offset) else { break };
                    let weight = if distance_weighting { 1.0 / offset as f64 } else { 1.0 };
                    *cells.entry((t, u)).or_insert(0.0) += weight;
                    *cells.entry((u, t)).or_insert(0.0) += weight;
                }
            }
        }
        Ok(Self::from_cells(size, cells))
    }

    fn from_cells(size: usize, cells: BTreeMap<(usize, usize), f64>) -> Self {
        let mut row_sums = vec![0.0; size];
        let entries: Vec<(usize, usize, f64)> = cells
            .into_iter()
            .filter(|&(_, w)| w != 0.0)
            .map(|((t, u), w)| {
                row_sums[t] += w;
                (t, u, w)
            })
            .collect();
        CooccurrenceMatrix { size, entries, row_sums }
    }

    /// Builds from explicit symmetric triples; each `(t, u, w)` is mirrored.
    /// Mostly useful for fixtures.
    pub fn from_triples(size: usize, triples: &[(usize, usize, f64)]) -> Self {
        let mut cells = BTreeMap::new();
        for &(t, u, w) in triples {
            assert!(t < size && u < size, "triple ({t}, {u}) outside a {size}x{size} matrix");
            *cells.entry((t, u)).or_insert(0.0) += w;
            if t != u {
                *cells.entry((u, t)).or_insert(0.0) += w;
            }
        }
        Self::from_cells(size, cells)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of stored (nonzero) cells.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, t: usize, u: usize) -> f64 {
        self.entries.binary_search_by(|&(a, b, _)| (a, b).cmp(&(t, u))).map(|i| self.entries[i].2).unwrap_or(0.0)
    }

    pub fn row_sum(&self, t: usize) -> f64 {
        self.row_sums.get(t).copied().unwrap_or(0.0)
    }

    /// Stored cells in row-major order.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }
}

/// Child/parent pairs read from a HyperLex-style file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RelationSet {
    pairs: Vec<(String, String)>,
    entities: Vec<String>,
    entity_index: HashMap<String, usize>,
}

impl RelationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Collects pairs, collapsing duplicates. Fails on the first
    /// self-relation, reporting its 1-based position.
    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut set = RelationSet::new();
        for (i, (child, parent)) in pairs.into_iter().enumerate() {
            set.insert(child.into(), parent.into(), i + 1)?;
        }
        Ok(set)
    }

    fn insert(&mut self, child: String, parent: String, line: usize) -> Result<bool, CorpusError> {
        if child == parent {
            return Err(CorpusError::SelfRelation(line));
        }
        if self.contains(&child, &parent) {
            return Ok(false);
        }
        for entity in [&child, &parent] {
            if !self.entity_index.contains_key(entity.as_str()) {
                self.entity_index.insert(entity.clone(), self.entities.len());
                self.entities.push(entity.clone());
            }
        }
        self.pairs.push((child, parent));
        Ok(true)
    }

    pub fn contains(&self, child: &str, parent: &str) -> bool {
        // Relation files are small; a scan keeps the structure simple.
        self.pairs.iter().any(|(c, p)| c == child && p == parent)
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Entities in order of first appearance (child before parent).
    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn entity_id(&self, entity: &str) -> Option<usize> {
        self.entity_index.get(entity).copied()
    }

    /// Parents recorded for `child`, in file order.
    pub fn parents_of<'a>(&'a self, child: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.pairs.iter().filter(move |(c, _)| c == child).map(|(_, p)| p.as_str())
    }

    /// Entities that never appear as a child.
    pub fn type_nodes(&self) -> HashSet<&str> {
        let children: HashSet<&str> = self.pairs.iter().map(|(c, _)| c.as_str()).collect();
        self.entities.iter().map(String::as_str).filter(|e| !children.contains(e)).collect()
    }

    pub fn find_matching_terms(&self, query: &str) -> Vec<String> {
        find_matching_terms(self.entities.iter().map(String::as_str), query)
    }

    /// Writes `child<TAB>parent` lines.
    pub fn write_hyperlex<W: Write>(&self, mut sink: W) -> io::Result<()> {
        for (child, parent) in &self.pairs {
            writeln!(sink, "{child}\t{parent}")?;
        }
        Ok(())
    }
}

/// Parses HyperLex-style text: one `child parent [score]` relation per line,
/// fields separated by a tab or runs of spaces, `#` comments and blank lines
/// skipped.
pub fn parse_hyperlex(bytes: &[u8]) -> Result<RelationSet, CorpusError> {
    let text = std::str::from_utf8(bytes)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut set = RelationSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_number = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(['\t', ' ']).filter(|f| !f.is_empty()).collect();
        let (child, parent) = match fields.as_slice() {
            [child, parent] => (*child, *parent),
            // graded HyperLex score, ignored
            [child, parent, score] if score.parse::<f64>().is_ok() => (*child, *parent),
            _ => return Err(CorpusError::MalformedLine(line_number)),
        };
        set.insert(child.to_owned(), parent.to_owned(), line_number)?;
    }
    Ok(set)
}

pub fn read_hyperlex<R: Read>(mut source: R) -> Result<RelationSet, CorpusError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    parse_hyperlex(&bytes)
}

pub fn read_hyperlex_file<P: AsRef<Path>>(path: P) -> Result<RelationSet, CorpusError> {
    parse_hyperlex(&std::fs::read(path)?)
}

/// Every term containing `query` anywhere (not only as a prefix), ordered by
/// match position, then lexicographically. Comparison is case-sensitive on
/// NFC forms.
pub fn find_matching_terms<'a, I>(terms: I, query: &str) -> Vec<String>
where
    I: IntoIterator<Item = &'a str>,
{
    let query: String = query.nfc().collect();
    let mut hits: Vec<(usize, String)> = terms
        .into_iter()
        .filter_map(|term| {
            let normalized: String = term.nfc().collect();
            let byte_pos = normalized.find(query.as_str())?;
            Some((normalized[..byte_pos].chars().count(), term.to_owned()))
        })
        .collect();
    hits.sort();
    hits.dedup();
    hits.into_iter().map(|(_, term)| term).collect()
}

/// Strips combining marks and maps the open vowels and other letters of the
/// Fon and Nobiin alphabets onto plain Latin, so `nɔví` folds to `novi`.
pub fn fold_diacritics(text: &str) -> String {
    text.nfd()
        .filter(|&c| get_general_category(c) != GeneralCategory::NonspacingMark)
        .map(|c| match c {
            'ɔ' => 'o',
            'Ɔ' => 'O',
            'ɛ' => 'e',
            'Ɛ' => 'E',
            'ɖ' => 'd',
            'Ɖ' => 'D',
            'ŋ' => 'n',
            'Ŋ' => 'N',
            'ƒ' => 'f',
            'ʋ' => 'v',
            other => other,
        })
        .collect()
}

/// Lookup suggestions for an unknown term: substring matches first, and when
/// there are none, substring matches after diacritic folding on both sides.
pub fn suggest_terms<'a, I>(terms: I, query: &str) -> Vec<String>
where
    I: IntoIterator<Item = &'a str> + Clone,
{
    let direct = find_matching_terms(terms.clone(), query);
    if !direct.is_empty() {
        return direct;
    }
    let folded_query = fold_diacritics(query);
    let mut hits: Vec<(usize, String)> = terms
        .into_iter()
        .filter_map(|term| {
            let folded = fold_diacritics(term);
            let byte_pos = folded.find(folded_query.as_str())?;
            Some((folded[..byte_pos].chars().count(), term.to_owned()))
        })
        .collect();
    hits.sort();
    hits.dedup();
    hits.into_iter().map(|(_, term)| term).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> Vec<Token> {
        words.iter().map(|w| Token::new(w).unwrap()).collect()
    }

    fn surfaces(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(Token::as_str).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(surfaces(&tokenize("nɔví  sunnu.", false)), ["nɔví", "sunnu"]);
        assert!(tokenize("", false).is_empty());
        assert_eq!(surfaces(&tokenize("tɔ ce, tɔ ce", false)), ["tɔ", "ce", "tɔ", "ce"]);
    }

    #[test]
    fn tokenize_keeps_case_unless_asked() {
        assert_eq!(surfaces(&tokenize("Hassan «Munâ»", false)), ["Hassan", "Munâ"]);
        assert_eq!(surfaces(&tokenize("Hassan Munâ", true)), ["hassan", "munâ"]);
    }

    #[test]
    fn tokenize_composes_decomposed_input() {
        let decomposed = "abo\u{302}";
        let tokens = tokenize(decomposed, false);
        assert_eq!(tokens[0].as_str(), "abô");
        assert_eq!(tokens[0].as_str().as_bytes(), "abô".as_bytes());
    }

    #[test]
    fn tokenize_drops_pure_punctuation_and_keeps_inner_marks() {
        assert_eq!(surfaces(&tokenize("-- boy_name ... x-y", false)), ["boy_name", "x-y"]);
    }

    #[test]
    fn vocabulary_examples() {
        let sentences = vec![toks(&["a", "b", "a"]), toks(&["a"])];
        let v = Vocabulary::build(&sentences, 2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.count(0), 3);

        let v = Vocabulary::build(&sentences, 1).unwrap();
        assert_eq!(v.entries(), &[(Token::new("a").unwrap(), 3), (Token::new("b").unwrap(), 1)]);

        let err = Vocabulary::build(&[toks(&["b"])], 2).unwrap_err();
        assert!(matches!(err, CorpusError::EmptyVocabulary { min_count: 2 }));
        assert!(matches!(Vocabulary::build(&sentences, 0), Err(CorpusError::InvalidMinCount)));
    }

    #[test]
    fn corpus_drops_oov_tokens() {
        let sentences = vec![toks(&["a", "b", "a"]), toks(&["c"])];
        let v = Vocabulary::build(&sentences, 2).unwrap();
        let corpus = Corpus::from_tokens(&v, &sentences);
        assert_eq!(corpus.sentences(), &[vec![0, 0]]);
        assert_eq!(corpus.total_tokens(), 2);
    }

    #[test]
    fn cooccurrence_examples() {
        let m = CooccurrenceMatrix::build(&Corpus::from_ids(vec![vec![0, 1]]), 2, 5, false).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 0), 1.0);

        let xyz = Corpus::from_ids(vec![vec![0, 1, 2]]);
        let m = CooccurrenceMatrix::build(&xyz, 3, 1, false).unwrap();
        assert_eq!((m.get(0, 1), m.get(1, 2), m.get(0, 2)), (1.0, 1.0, 0.0));
        assert_eq!(m.nnz(), 4);

        let m = CooccurrenceMatrix::build(&xyz, 3, 2, true).unwrap();
        assert_eq!(m.get(0, 2), 0.5);
        assert_eq!(m.get(2, 0), 0.5);
    }

    #[test]
    fn cooccurrence_never_crosses_sentences() {
        let corpus = Corpus::from_ids(vec![vec![0], vec![1]]);
        let m = CooccurrenceMatrix::build(&corpus, 2, 3, false).unwrap();
        assert!(m.is_empty());
        assert_eq!(m.row_sum(0), 0.0);
        assert!(matches!(CooccurrenceMatrix::build(&corpus, 2, 0, false), Err(CorpusError::InvalidWindow)));
    }

    #[test]
    fn hyperlex_examples() {
        let set = parse_hyperlex(b"dossou\tboy_name\n").unwrap();
        assert_eq!(set.pairs(), &[("dossou".to_owned(), "boy_name".to_owned())]);

        let set = parse_hyperlex(b"a b 0.75\n").unwrap();
        assert_eq!(set.pairs(), &[("a".to_owned(), "b".to_owned())]);

        assert!(matches!(parse_hyperlex(b"x\n"), Err(CorpusError::MalformedLine(1))));
    }

    #[test]
    fn hyperlex_errors_and_skips() {
        let text = "# comment\r\n\r\nnɔví   sunnu\r\nnɔví\tsunnu\r\n";
        let set = parse_hyperlex(text.as_bytes()).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.entities(), &["nɔví", "sunnu"]);

        assert!(matches!(parse_hyperlex(b"a b\nc c\n"), Err(CorpusError::SelfRelation(2))));
        assert!(matches!(parse_hyperlex(b"a b c\n"), Err(CorpusError::MalformedLine(1))));
        assert!(matches!(parse_hyperlex(&[0x61, 0x20, 0xff, 0x0a]), Err(CorpusError::InvalidUtf8(_))));
    }

    #[test]
    fn type_nodes_are_parent_only_entities() {
        let set = RelationSet::from_pairs([("a", "boy_name"), ("b", "girl_name"), ("boy_name", "name")]).unwrap();
        let mut nodes: Vec<_> = set.type_nodes().into_iter().collect();
        nodes.sort();
        assert_eq!(nodes, ["girl_name", "name"]);
        assert_eq!(set.parents_of("a").collect::<Vec<_>>(), ["boy_name"]);
    }

    #[test]
    fn matching_terms_examples() {
        let vocab = ["dossou", "abdou", "koffi"];
        assert_eq!(find_matching_terms(vocab, "dou"), ["abdou"]);
        assert_eq!(find_matching_terms(["dossou"], ""), ["dossou"]);
        assert!(find_matching_terms(["abc"], "zz").is_empty());
    }

    #[test]
    fn matching_terms_order_by_position_then_text() {
        let terms = ["xab", "ab", "zab", "abc"];
        assert_eq!(find_matching_terms(terms, "ab"), ["ab", "abc", "xab", "zab"]);
    }

    #[test]
    fn suggestions_fold_diacritics() {
        assert!(find_matching_terms(["nɔví", "tɔ"], "novi").is_empty());
        assert_eq!(suggest_terms(["nɔví", "tɔ"], "novi"), ["nɔví"]);
        assert_eq!(fold_diacritics("abô ğ ɛ"), "abo g e");
    }

    fn word() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["a", "b", "c", "ɔ", "nɔví", "abô", "ğe", "x_y"]).prop_map(String::from)
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "[ a-zɔɛâû.,!?'\\-]{0,40}") {
            let once = tokenize(&text, false);
            let joined = once.iter().map(Token::as_str).collect::<Vec<_>>().join(" ");
            prop_assert_eq!(tokenize(&joined, false), once);
        }

        #[test]
        fn cooccurrence_is_symmetric_with_consistent_rows(
            sentences in prop::collection::vec(prop::collection::vec(0usize..6, 0..12), 0..50),
            window in 1usize..5,
            weighting: bool,
        ) {
            let corpus = Corpus::from_ids(sentences);
            let m = CooccurrenceMatrix::build(&corpus, 6, window, weighting).unwrap();
            for t in 0..6 {
                for u in 0..6 {
                    prop_assert_eq!(m.get(t, u), m.get(u, t));
                }
                let row: f64 = (0..6).map(|u| m.get(t, u)).sum();
                prop_assert!((row - m.row_sum(t)).abs() <= 1e-9 * row.abs().max(1.0));
            }
            prop_assert!(m.entries().iter().all(|&(_, _, w)| w != 0.0));

            let mut pair_weight = 0.0;
            for s in corpus.sentences() {
                for i in 0..s.len() {
                    for k in 1..=window {
                        if i + k < s.len() {
                            pair_weight += if weighting { 1.0 / k as f64 } else { 1.0 };
                        }
                    }
                }
            }
            let total: f64 = (0..6).map(|t| m.row_sum(t)).sum();
            prop_assert!((total - 2.0 * pair_weight).abs() <= 1e-9 * total.max(1.0));
        }

        #[test]
        fn hyperlex_round_trips_diacritics(pairs in prop::collection::vec((word(), word()), 1..20)) {
            let pairs: Vec<_> = pairs.into_iter().filter(|(a, b)| a != b).collect();
            let set = RelationSet::from_pairs(pairs.clone()).unwrap();
            let mut bytes = Vec::new();
            set.write_hyperlex(&mut bytes).unwrap();
            let back = parse_hyperlex(&bytes).unwrap();
            prop_assert_eq!(back.pairs(), set.pairs());
        }

        #[test]
        fn matching_generalizes_prefix(terms in prop::collection::vec(word(), 0..10), query in "[a-cɔ]{0,2}") {
            let refs: Vec<&str> = terms.iter().map(String::as_str).collect();
            let found = find_matching_terms(refs.iter().copied(), &query);
            for term in &refs {
                if term.starts_with(query.as_str()) {
                    prop_assert!(found.iter().any(|f| f == term));
                }
            }
        }
    }
}
