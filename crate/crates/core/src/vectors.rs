//! Dense row-major matrices and token-keyed vector tables.

use std::cmp::Ordering;
use std::collections::HashMap;

use thiserror::Error;

use crate::corpus::suggest_terms;

/// Lookup of a term that the model never saw, with close vocabulary entries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("'{term}' is not in the vocabulary{}", format_suggestions(.suggestions))]
pub struct UnknownTerm {
    pub term: String,
    pub suggestions: Vec<String>,
}

fn format_suggestions(suggestions: &[String]) -> String {
    if suggestions.is_empty() {
        String::new()
    } else {
        format!(" (did you mean: {})", suggestions.join(", "))
    }
}

impl UnknownTerm {
    pub fn new<'a, I>(term: &str, vocabulary: I) -> Self
    where
        I: IntoIterator<Item = &'a str> + Clone,
    {
        UnknownTerm { term: term.to_owned(), suggestions: suggest_terms(vocabulary, term) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// Cosine similarity clamped to [-1, 1]; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    // sqrt(fl(x * x)) == x, so identical vectors score exactly 1
    let denom = (norm_sq(a) * norm_sq(b)).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        (dot(a, b) / denom).clamp(-1.0, 1.0)
    }
}

/// Vectors addressed by token, in a fixed row order.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyedVectors {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Matrix,
}

impl KeyedVectors {
    /// Panics if `tokens` contains duplicates or disagrees with the row count.
    pub fn new(tokens: Vec<String>, vectors: Matrix) -> Self {
        assert_eq!(tokens.len(), vectors.rows(), "one token per row");
        let index: HashMap<String, usize> = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        assert_eq!(index.len(), tokens.len(), "duplicate token");
        KeyedVectors { tokens, index, vectors }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.vectors.row(i))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.vectors
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.tokens.iter().enumerate().map(|(i, t)| (t.as_str(), self.vectors.row(i)))
    }

    fn lookup(&self, token: &str) -> Result<usize, UnknownTerm> {
        self.index.get(token).copied().ok_or_else(|| UnknownTerm::new(token, self.tokens.iter().map(String::as_str)))
    }

    /// Ranks every other token by cosine similarity to the sum of the
    /// `positives` vectors. Ties go to the lexicographically smaller token.
    pub fn most_similar(&self, positives: &[&str], topn: usize) -> Result<Vec<(String, f64)>, UnknownTerm> {
        let ids = positives.iter().map(|p| self.lookup(p)).collect::<Result<Vec<_>, _>>()?;
        let mut query = vec![0.0; self.dim()];
        for &id in &ids {
            for (q, x) in query.iter_mut().zip(self.vectors.row(id)) {
                *q += x;
            }
        }
        let mut scored: Vec<(&str, f64)> = (0..self.len())
            .filter(|i| !ids.contains(i))
            .map(|i| (self.tokens[i].as_str(), cosine(&query, self.vectors.row(i))))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(b.0)));
        Ok(scored.into_iter().take(topn).map(|(t, s)| (t.to_owned(), s)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(rows: &[(&str, Vec<f64>)]) -> KeyedVectors {
        KeyedVectors::new(
            rows.iter().map(|(t, _)| (*t).to_owned()).collect(),
            Matrix::from_rows(&rows.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>()),
        )
    }

    #[test]
    fn most_similar_cosine_arithmetic() {
        let kv = table(&[("x", vec![1.0, 0.0]), ("y", vec![1.0, 1.0]), ("z", vec![0.0, 1.0])]);
        let hits = kv.most_similar(&["x"], 2).unwrap();
        assert_eq!(hits[0].0, "y");
        assert!((hits[0].1 - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(hits[1], ("z".to_owned(), 0.0));
    }

    #[test]
    fn duplicate_row_scores_one() {
        let kv = table(&[("x", vec![0.3, -0.2]), ("a", vec![-1.0, 0.5]), ("y", vec![0.3, -0.2])]);
        let hits = kv.most_similar(&["x"], 1).unwrap();
        assert_eq!(hits, vec![("y".to_owned(), 1.0)]);
    }

    #[test]
    fn ties_break_lexicographically() {
        let kv = table(&[("q", vec![1.0, 0.0]), ("b", vec![2.0, 0.0]), ("a", vec![3.0, 0.0])]);
        let hits = kv.most_similar(&["q"], 2).unwrap();
        assert_eq!(hits[0].0, "a");
        assert_eq!(hits[1].0, "b");
    }

    #[test]
    fn unknown_positive_carries_suggestions() {
        let kv = table(&[("nɔví", vec![1.0]), ("tɔ", vec![0.5])]);
        let err = kv.most_similar(&["novi"], 1).unwrap_err();
        assert_eq!(err.term, "novi");
        assert_eq!(err.suggestions, ["nɔví"]);
        assert!(err.to_string().contains("did you mean: nɔví"));
    }

    #[test]
    fn zero_vector_has_zero_cosine() {
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]), 0.0);
    }

    proptest! {
        #[test]
        fn cosine_is_scale_invariant(v in prop::collection::vec(-5.0f64..5.0, 3), k in 0.01f64..100.0) {
            prop_assume!(norm(&v) > 1e-6);
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            prop_assert!((cosine(&v, &scaled) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn most_similar_excludes_queries_and_is_sorted(
            rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 3..12),
            pick in 0usize..3,
        ) {
            let tokens: Vec<String> = (0..rows.len()).map(|i| format!("w{i}")).collect();
            let kv = KeyedVectors::new(tokens.clone(), Matrix::from_rows(&rows));
            let hits = kv.most_similar(&[&tokens[pick]], rows.len()).unwrap();
            prop_assert_eq!(hits.len(), rows.len() - 1);
            prop_assert!(hits.iter().all(|(t, s)| *t != tokens[pick] && (-1.0..=1.0).contains(s)));
            prop_assert!(hits.windows(2).all(|w| w[0].1 >= w[1].1));
        }
    }
}
