//! Ranking metrics for Poincaré models, classification reports and
//! cross-model transfer evaluation.
//!
//! Ranking uses one positive per query: for a relation `(u, v)` every other
//! embedded entity except `u` and the remaining known parents of `u` is a
//! candidate, candidates are sorted by distance from `u`, and the query
//! contributes `1/rank` to the mean average precision.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{find_matching_terms, RelationSet};
use crate::poincare::{project, PoincareError, PoincareModel};
use crate::vectors::UnknownTerm;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("'{0}' is excluded from its own candidate pool")]
    ExcludedTarget(String),
    #[error("held-out entity '{0}' was never embedded")]
    UnseenEntity(String),
    #[error("no relations to evaluate")]
    EmptyRelations,
    #[error("{golds} gold labels but {preds} predictions")]
    LengthMismatch { golds: usize, preds: usize },
    #[error("no labels to evaluate")]
    EmptyInput,
    #[error(transparent)]
    UnknownTerm(#[from] UnknownTerm),
    #[error(transparent)]
    Poincare(#[from] PoincareError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankingReport {
    pub mean_rank: f64,
    pub map: f64,
    pub num_queries: usize,
}

impl RankingReport {
    fn from_ranks(ranks: &[usize]) -> Result<Self, EvalError> {
        if ranks.is_empty() {
            return Err(EvalError::EmptyRelations);
        }
        let n = ranks.len() as f64;
        Ok(RankingReport {
            mean_rank: ranks.iter().map(|&r| r as f64).sum::<f64>() / n,
            map: ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / n,
            num_queries: ranks.len(),
        })
    }
}

impl fmt::Display for RankingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}/{:.2}", self.mean_rank, self.map)
    }
}

/// 1-based rank of `v` among the candidates for query `u`, and its AP
/// contribution `1/rank`. Entities at equal distance are ordered by name.
pub fn rank_and_ap(
    model: &PoincareModel,
    u: &str,
    v: &str,
    exclude: &HashSet<&str>,
) -> Result<(usize, f64), EvalError> {
    let u_id = model.lookup(u)?;
    let v_id = model.lookup(v)?;
    if exclude.contains(v) || u == v {
        return Err(EvalError::ExcludedTarget(v.to_owned()));
    }
    let target = model.distance_between(u_id, v_id);
    let ahead = model
        .entities()
        .iter()
        .enumerate()
        .filter(|&(id, name)| id != u_id && id != v_id && !exclude.contains(name.as_str()))
        .filter(|&(id, name)| {
            let d = model.distance_between(u_id, id);
            d < target || (d == target && name.as_str() < v)
        })
        .count();
    let rank = ahead + 1;
    Ok((rank, 1.0 / rank as f64))
}

/// Ranks each training relation against the model it was trained into.
pub fn evaluate_reconstruction(model: &PoincareModel, relations: &RelationSet) -> Result<RankingReport, EvalError> {
    let mut ranks = Vec::with_capacity(relations.len());
    for (u, v) in relations.pairs() {
        let exclude: HashSet<&str> = relations.parents_of(u).filter(|p| p != v).collect();
        ranks.push(rank_and_ap(model, u, v, &exclude)?.0);
    }
    RankingReport::from_ranks(&ranks)
}

/// Ranks held-out relations; the known training parents of `u` (and its
/// other held-out parents) are removed from the candidate pool.
pub fn evaluate_link_prediction(model: &PoincareModel, held_out: &RelationSet) -> Result<RankingReport, EvalError> {
    if let Some(missing) = held_out.entities().iter().find(|e| !model.contains(e)) {
        return Err(EvalError::UnseenEntity(missing.clone()));
    }
    let training = model.relations();
    let mut ranks = Vec::with_capacity(held_out.len());
    for (u, v) in held_out.pairs() {
        let exclude: HashSet<&str> = training.parents_of(u).chain(held_out.parents_of(u)).filter(|p| p != v).collect();
        ranks.push(rank_and_ap(model, u, v, &exclude)?.0);
    }
    RankingReport::from_ranks(&ranks)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    /// One row per label seen in either golds or predictions, sorted.
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub total_support: usize,
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Multiclass precision, recall and F1 from the confusion counts. Empty
/// denominators give 0.
pub fn classification_report<S: AsRef<str>>(golds: &[S], preds: &[S]) -> Result<ClassificationReport, EvalError> {
    if golds.len() != preds.len() {
        return Err(EvalError::LengthMismatch { golds: golds.len(), preds: preds.len() });
    }
    if golds.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    // label -> (true positives, predicted count, gold count)
    let mut counts: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    let mut correct = 0;
    for (g, p) in golds.iter().zip(preds) {
        let (g, p) = (g.as_ref(), p.as_ref());
        counts.entry(g).or_default().2 += 1;
        counts.entry(p).or_default().1 += 1;
        if g == p {
            counts.entry(g).or_default().0 += 1;
            correct += 1;
        }
    }
    let total = golds.len();
    let per_class: Vec<ClassMetrics> = counts
        .into_iter()
        .map(|(label, (tp, predicted, support))| {
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            ClassMetrics { label: label.to_owned(), precision, recall, f1: harmonic(precision, recall), support }
        })
        .collect();
    let k = per_class.len() as f64;
    let macro_avg = Averages {
        precision: per_class.iter().map(|c| c.precision).sum::<f64>() / k,
        recall: per_class.iter().map(|c| c.recall).sum::<f64>() / k,
        f1: per_class.iter().map(|c| c.f1).sum::<f64>() / k,
    };
    let weighted =
        |f: fn(&ClassMetrics) -> f64| per_class.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / total as f64;
    let weighted_avg =
        Averages { precision: weighted(|c| c.precision), recall: weighted(|c| c.recall), f1: weighted(|c| c.f1) };
    Ok(ClassificationReport {
        per_class,
        accuracy: ratio(correct, total),
        macro_avg,
        weighted_avg,
        total_support: total,
    })
}

fn pct(x: f64) -> String {
    format!("{:.0}", x * 100.0)
}

impl ClassificationReport {
    pub fn class(&self, label: &str) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.label == label)
    }

    /// Plain-text table with values as integer percentages.
    pub fn render(&self) -> String {
        let width = self.per_class.iter().map(|c| c.label.chars().count()).chain([12]).max().unwrap_or(12);
        let mut out = String::new();
        let _ =
            writeln!(out, "{:<width$}  {:>9}  {:>6}  {:>8}  {:>7}", "", "Precision", "Recall", "F1-Score", "Support");
        for c in &self.per_class {
            let pad = width - c.label.chars().count() + c.label.len();
            let _ = writeln!(
                out,
                "{:<pad$}  {:>9}  {:>6}  {:>8}  {:>7}",
                c.label,
                pct(c.precision),
                pct(c.recall),
                pct(c.f1),
                c.support
            );
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>6}  {:>8}  {:>7}",
            "accuracy",
            "",
            "",
            pct(self.accuracy),
            self.total_support
        );
        for (name, avg) in [("macro avg", self.macro_avg), ("weighted avg", self.weighted_avg)] {
            let _ = writeln!(
                out,
                "{:<width$}  {:>9}  {:>6}  {:>8}  {:>7}",
                name,
                pct(avg.precision),
                pct(avg.recall),
                pct(avg.f1),
                self.total_support
            );
        }
        out
    }
}

impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub name: String,
    pub predicted: String,
    pub score: f64,
    /// The name was not in the model and was placed by the fallback rule.
    pub fallback: bool,
}

/// Position for a name the model never saw: the Euclidean centroid of the
/// entities containing it (projected back into the ball), or the origin when
/// nothing matches.
pub fn fallback_point(model: &PoincareModel, name: &str) -> Vec<f64> {
    let matches = find_matching_terms(model.entities().iter().map(String::as_str), name);
    let mut centroid = vec![0.0; model.dim()];
    if matches.is_empty() {
        return centroid;
    }
    for m in &matches {
        let p = model.point(m).expect("match comes from the model's entities");
        centroid.iter_mut().zip(p.coords()).for_each(|(c, x)| *c += x);
    }
    let n = matches.len() as f64;
    centroid.iter_mut().for_each(|c| *c /= n);
    project(&mut centroid, model.curvature(), model.config().eps);
    centroid
}

/// Predicts a type for each name. Names outside the model go through
/// [`fallback_point`].
pub fn classify_names<S: AsRef<str>>(
    model: &PoincareModel,
    names: &[S],
    candidate_types: &[&str],
) -> Result<Vec<Prediction>, EvalError> {
    if candidate_types.is_empty() {
        return Err(PoincareError::EmptyCandidates.into());
    }
    for t in candidate_types {
        model.lookup(t)?;
    }
    names
        .iter()
        .map(|name| {
            let name = name.as_ref();
            let (point, fallback) = match model.point(name) {
                Ok(p) => (p.coords().to_vec(), false),
                Err(_) => (fallback_point(model, name), true),
            };
            let (predicted, score) = model.predict_for_point(&point, candidate_types)?;
            Ok(Prediction { name: name.to_owned(), predicted, score, fallback })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub report: ClassificationReport,
    pub predictions: Vec<Prediction>,
    pub fallback_count: usize,
}

/// Classifies labelled names that may come from another language's data.
pub fn cross_evaluate<S: AsRef<str>>(
    model: &PoincareModel,
    test: &[(S, S)],
    candidate_types: &[&str],
) -> Result<TransferReport, EvalError> {
    let names: Vec<&str> = test.iter().map(|(n, _)| n.as_ref()).collect();
    let golds: Vec<&str> = test.iter().map(|(_, g)| g.as_ref()).collect();
    let predictions = classify_names(model, &names, candidate_types)?;
    let preds: Vec<&str> = predictions.iter().map(|p| p.predicted.as_str()).collect();
    let report = classification_report(&golds, &preds)?;
    let fallback_count = predictions.iter().filter(|p| p.fallback).count();
    Ok(TransferReport { report, predictions, fallback_count })
}

/// Distinct labels in first-seen order; handy for building candidate lists.
pub fn distinct_labels<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    labels.iter().filter(|l| seen.insert(l.as_ref().to_owned())).map(|l| l.as_ref().to_owned()).collect()
}
