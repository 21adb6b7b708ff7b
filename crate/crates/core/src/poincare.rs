//! Poincaré-ball embeddings of child/parent relations.
//!
//! A ball of curvature `c > 0` is `{x : c‖x‖² < 1}`, radius `1/√c`, with
//!
//! ```text
//! d_c(x, y) = (1/√c) · arcosh(1 + 2c‖x − y‖² / ((1 − c‖x‖²)(1 − c‖y‖²)))
//! ```
//!
//! which is the usual unit-ball distance at `c = 1`. Training follows the
//! negative-sampling objective of Poincaré embeddings: for each relation
//! `(u, v)` it minimises `-log(e^{-d(u,v)} / Σ_{w ∈ N ∪ {v}} e^{-d(u,w)})`
//! with Riemannian SGD and a projection that keeps every point at least
//! `eps` inside the boundary.

use std::collections::{HashMap, HashSet};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::corpus::RelationSet;
use crate::vectors::{norm, norm_sq, UnknownTerm};

#[derive(Debug, Error)]
pub enum PoincareError {
    #[error("point with squared norm {norm_sq} lies outside the ball of curvature {curvature}")]
    OutsideBall { norm_sq: f64, curvature: f64 },
    #[error("gradient contains a non-finite value")]
    NonFiniteGradient,
    #[error("points have different dimensions ({0} and {1})")]
    DimensionMismatch(usize, usize),
    #[error("relation set is empty")]
    EmptyRelations,
    #[error("candidate list is empty")]
    EmptyCandidates,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    UnknownTerm(#[from] UnknownTerm),
}

pub fn ball_radius(curvature: f64) -> f64 {
    1.0 / curvature.sqrt()
}

/// A point strictly inside a Poincaré ball.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincarePoint(Vec<f64>);

impl PoincarePoint {
    pub fn new(coords: Vec<f64>, curvature: f64) -> Result<Self, PoincareError> {
        check_inside(&coords, curvature)?;
        Ok(PoincarePoint(coords))
    }

    pub fn origin(dim: usize) -> Self {
        PoincarePoint(vec![0.0; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

fn check_inside(x: &[f64], curvature: f64) -> Result<(), PoincareError> {
    let n2 = norm_sq(x);
    let inside = curvature * n2 < 1.0 && x.iter().all(|v| v.is_finite());
    if !inside {
        return Err(PoincareError::OutsideBall { norm_sq: n2, curvature });
    }
    Ok(())
}

/// `arcosh(1 + x)` computed without cancellation for small `x`.
fn arcosh_1p(x: f64) -> f64 {
    (x + (x * (x + 2.0)).sqrt()).ln_1p()
}

fn distance_argument(x: &[f64], y: &[f64], c: f64) -> f64 {
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    2.0 * c * diff / ((1.0 - c * norm_sq(x)) * (1.0 - c * norm_sq(y)))
}

fn distance_unchecked(x: &[f64], y: &[f64], c: f64) -> f64 {
    arcosh_1p(distance_argument(x, y, c)) / c.sqrt()
}

/// Hyperbolic distance between two points of the curvature-`c` ball.
pub fn poincare_distance(x: &[f64], y: &[f64], curvature: f64) -> Result<f64, PoincareError> {
    if x.len() != y.len() {
        return Err(PoincareError::DimensionMismatch(x.len(), y.len()));
    }
    check_inside(x, curvature)?;
    check_inside(y, curvature)?;
    Ok(distance_unchecked(x, y, curvature))
}

/// Euclidean gradient of `d_c(u, v)` with respect to `u`. Zero at `u = v`,
/// where the distance is not differentiable.
pub fn distance_gradient(u: &[f64], v: &[f64], c: f64) -> Vec<f64> {
    let alpha = 1.0 - c * norm_sq(u);
    let beta = 1.0 - c * norm_sq(v);
    let delta: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    let x = 2.0 * c * delta / (alpha * beta);
    let root = (x * (x + 2.0)).sqrt();
    if root == 0.0 {
        return vec![0.0; u.len()];
    }
    let scale = 4.0 * c.sqrt() / (alpha * beta * root);
    u.iter().zip(v).map(|(a, b)| scale * ((a - b) + c * delta * a / alpha)).collect()
}

/// Scales `x` onto the sphere of radius `ball_radius − eps` when it is not
/// already strictly inside it.
pub fn project(x: &mut [f64], curvature: f64, eps: f64) {
    let target = ball_radius(curvature) - eps;
    let n = norm(x);
    if n < target {
        return;
    }
    let original: Vec<f64> = x.to_vec();
    let mut scale = target / n;
    loop {
        for (dst, src) in x.iter_mut().zip(&original) {
            *dst = src * scale;
        }
        if norm(x) <= target {
            break;
        }
        scale *= 1.0 - f64::EPSILON;
    }
}

/// One Riemannian SGD step: the Euclidean gradient is rescaled by the
/// inverse metric `(1 − c‖θ‖²)² / 4`, applied, and the result projected.
pub fn riemannian_update(
    point: &[f64],
    gradient: &[f64],
    lr: f64,
    curvature: f64,
    eps: f64,
) -> Result<Vec<f64>, PoincareError> {
    if point.len() != gradient.len() {
        return Err(PoincareError::DimensionMismatch(point.len(), gradient.len()));
    }
    if gradient.iter().any(|g| !g.is_finite()) {
        return Err(PoincareError::NonFiniteGradient);
    }
    check_inside(point, curvature)?;
    let metric = (1.0 - curvature * norm_sq(point)).powi(2) / 4.0;
    let mut next: Vec<f64> = point.iter().zip(gradient).map(|(p, g)| p - lr * metric * g).collect();
    project(&mut next, curvature, eps);
    Ok(next)
}

/// Circumference and area of a hyperbolic circle of radius `r`
/// (curvature −1): `2π sinh r` and `2π (cosh r − 1)`.
pub fn hyperbolic_circle(r: f64) -> (f64, f64) {
    let two_pi = 2.0 * std::f64::consts::PI;
    (two_pi * r.sinh(), two_pi * (r.cosh() - 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareConfig {
    pub dim: usize,
    pub curvature: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Negative samples per positive pair.
    pub negatives: usize,
    pub burn_in_epochs: usize,
    pub burn_in_lr_factor: f64,
    pub eps: f64,
    pub seed: u64,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        PoincareConfig {
            dim: 2,
            curvature: 1.0,
            epochs: 2000,
            learning_rate: 0.1,
            negatives: 10,
            burn_in_epochs: 10,
            burn_in_lr_factor: 0.1,
            eps: 1e-5,
            seed: 42,
        }
    }
}

impl PoincareConfig {
    pub fn ball_radius(&self) -> f64 {
        ball_radius(self.curvature)
    }

    pub fn validate(&self) -> Result<(), PoincareError> {
        let fail = |msg: &str| Err(PoincareError::InvalidConfig(msg.to_owned()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if !(self.curvature > 0.0 && self.curvature.is_finite()) {
            return fail("curvature must be positive");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if self.negatives == 0 {
            return fail("negatives must be at least 1");
        }
        if !(self.burn_in_lr_factor > 0.0 && self.burn_in_lr_factor <= 1.0) {
            return fail("burn_in_lr_factor must lie in (0, 1]");
        }
        if !(self.eps > 0.0 && self.eps < self.ball_radius()) {
            return fail("eps must be positive and smaller than the ball radius");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    /// Appears as a child in at least one relation.
    Leaf,
    /// Appears only as a parent.
    TypeNode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareModel {
    entities: Vec<String>,
    index: HashMap<String, usize>,
    points: Vec<PoincarePoint>,
    relations: RelationSet,
    config: PoincareConfig,
}

impl PoincareModel {
    /// Assembles a model from stored parts, re-checking the ball invariant
    /// and that every relation endpoint has a point.
    pub fn from_parts(
        entities: Vec<String>,
        points: Vec<Vec<f64>>,
        relations: RelationSet,
        config: PoincareConfig,
    ) -> Result<Self, PoincareError> {
        config.validate()?;
        assert_eq!(entities.len(), points.len(), "one point per entity");
        let points = points
            .into_iter()
            .map(|p| {
                if p.len() != config.dim {
                    return Err(PoincareError::DimensionMismatch(p.len(), config.dim));
                }
                PoincarePoint::new(p, config.curvature)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let index: HashMap<String, usize> = entities.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let model = PoincareModel { entities, index, points, relations, config };
        for entity in model.relations.entities() {
            model.lookup(entity)?;
        }
        Ok(model)
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn relations(&self) -> &RelationSet {
        &self.relations
    }

    pub fn config(&self) -> &PoincareConfig {
        &self.config
    }

    pub fn curvature(&self) -> f64 {
        self.config.curvature
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn contains(&self, entity: &str) -> bool {
        self.index.contains_key(entity)
    }

    pub fn entity_id(&self, entity: &str) -> Option<usize> {
        self.index.get(entity).copied()
    }

    pub fn lookup(&self, entity: &str) -> Result<usize, UnknownTerm> {
        self.entity_id(entity).ok_or_else(|| UnknownTerm::new(entity, self.entities.iter().map(String::as_str)))
    }

    pub fn point(&self, entity: &str) -> Result<&PoincarePoint, UnknownTerm> {
        Ok(&self.points[self.lookup(entity)?])
    }

    pub fn point_at(&self, id: usize) -> &PoincarePoint {
        &self.points[id]
    }

    pub fn points(&self) -> &[PoincarePoint] {
        &self.points
    }

    pub fn entity_kind(&self, entity: &str) -> Option<EntityKind> {
        self.contains(entity).then(|| {
            if self.relations.pairs().iter().any(|(c, _)| c == entity) {
                EntityKind::Leaf
            } else {
                EntityKind::TypeNode
            }
        })
    }

    /// Distance between two stored points, by id.
    pub fn distance_between(&self, a: usize, b: usize) -> f64 {
        distance_unchecked(self.points[a].coords(), self.points[b].coords(), self.config.curvature)
    }

    pub fn distance_to_point(&self, id: usize, point: &[f64]) -> f64 {
        distance_unchecked(self.points[id].coords(), point, self.config.curvature)
    }

    pub fn distance(&self, a: &str, b: &str) -> Result<f64, PoincareError> {
        Ok(self.distance_between(self.lookup(a)?, self.lookup(b)?))
    }

    /// How strongly `a` is of type `b`: the negated distance.
    pub fn score(&self, a: &str, b: &str) -> Result<f64, PoincareError> {
        Ok(-self.distance(a, b)?)
    }

    /// Highest-scoring candidate type for `name`; ties keep the earlier
    /// candidate.
    pub fn predict_entity_type(&self, name: &str, candidates: &[&str]) -> Result<(String, f64), PoincareError> {
        let point = self.point(name)?.coords().to_vec();
        self.predict_for_point(&point, candidates)
    }

    /// As [`predict_entity_type`](Self::predict_entity_type) for an
    /// arbitrary in-ball point.
    pub fn predict_for_point(&self, point: &[f64], candidates: &[&str]) -> Result<(String, f64), PoincareError> {
        if candidates.is_empty() {
            return Err(PoincareError::EmptyCandidates);
        }
        if point.len() != self.dim() {
            return Err(PoincareError::DimensionMismatch(point.len(), self.dim()));
        }
        check_inside(point, self.curvature())?;
        let mut best: Option<(&str, f64)> = None;
        for &candidate in candidates {
            let score = -self.distance_to_point(self.lookup(candidate)?, point);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((candidate, score));
            }
        }
        let (name, score) = best.expect("candidates is non-empty");
        Ok((name.to_owned(), score))
    }
}

/// Progress of a Poincaré training run.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincareReport {
    /// Mean loss per positive pair in each epoch.
    pub epoch_losses: Vec<f64>,
    pub updates: usize,
}

fn random_point_in_ball(rng: &mut impl Rng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let direction: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&direction);
        if n == 0.0 {
            continue;
        }
        let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
        return direction.into_iter().map(|d| d / n * r).collect();
    }
}

struct NegativeSampler {
    /// Known parents of each entity, as sorted ids.
    positives: Vec<Vec<usize>>,
    entity_count: usize,
}

impl NegativeSampler {
    /// Draws up to `k` distinct entities `w ≠ u` with `(u, w)` not a relation.
    fn sample(&self, u: usize, k: usize, rng: &mut impl Rng, out: &mut Vec<usize>) {
        out.clear();
        let excluded = &self.positives[u];
        let pool_size = self.entity_count - 1 - excluded.len();
        let allowed = |w: usize| w != u && excluded.binary_search(&w).is_err();
        if pool_size <= k {
            out.extend((0..self.entity_count).filter(|&w| allowed(w)));
        } else if pool_size >= 2 * k {
            while out.len() < k {
                let w = rng.random_range(0..self.entity_count);
                if allowed(w) && !out.contains(&w) {
                    out.push(w);
                }
            }
        } else {
            let pool: Vec<usize> = (0..self.entity_count).filter(|&w| allowed(w)).collect();
            out.extend(index::sample(rng, pool.len(), k).into_iter().map(|i| pool[i]));
        }
    }
}

/// Trains an embedding of `relations`.
pub fn train(
    relations: &RelationSet,
    config: &PoincareConfig,
) -> Result<(PoincareModel, PoincareReport), PoincareError> {
    train_with_hook(relations, config, |_, _| {})
}

/// Like [`train`], calling `hook(entity_id, point)` after every single
/// point update.
pub fn train_with_hook<F>(
    relations: &RelationSet,
    config: &PoincareConfig,
    mut hook: F,
) -> Result<(PoincareModel, PoincareReport), PoincareError>
where
    F: FnMut(usize, &[f64]),
{
    config.validate()?;
    if relations.is_empty() {
        return Err(PoincareError::EmptyRelations);
    }
    let entities: Vec<String> = relations.entities().to_vec();
    let n = entities.len();
    let c = config.curvature;
    let pairs: Vec<(usize, usize)> = relations
        .pairs()
        .iter()
        .map(|(u, v)| (relations.entity_id(u).unwrap(), relations.entity_id(v).unwrap()))
        .collect();

    let mut positives = vec![Vec::new(); n];
    for &(u, v) in &pairs {
        positives[u].push(v);
    }
    for p in &mut positives {
        p.sort_unstable();
        p.dedup();
    }
    let sampler = NegativeSampler { positives, entity_count: n };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init_radius = 0.001 * config.ball_radius();
    let mut points: Vec<Vec<f64>> = (0..n).map(|_| random_point_in_ball(&mut rng, config.dim, init_radius)).collect();

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut negatives = Vec::with_capacity(config.negatives);
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut updates = 0;

    for epoch in 0..config.epochs {
        let lr = if epoch < config.burn_in_epochs {
            config.learning_rate * config.burn_in_lr_factor
        } else {
            config.learning_rate
        };
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &pair in &order {
            let (u, v) = pairs[pair];
            sampler.sample(u, config.negatives, &mut rng, &mut negatives);

            // candidates[0] is the positive
            let candidates: Vec<usize> = std::iter::once(v).chain(negatives.iter().copied()).collect();
            let distances: Vec<f64> =
                candidates.iter().map(|&w| distance_unchecked(&points[u], &points[w], c)).collect();
            // with no negatives available the softmax is constant; fall back to
            // pulling the pair together on d(u, v) alone
            let attract_only = negatives.is_empty();
            let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
            let weights: Vec<f64> = distances.iter().map(|d| (min - d).exp()).collect();
            let total: f64 = weights.iter().sum();
            epoch_loss += if attract_only { distances[0] } else { distances[0] - min + total.ln() };

            // dL/dd_w = [w is positive] − softmax(−d)_w
            let mut grad_u = vec![0.0; config.dim];
            let mut candidate_grads: Vec<(usize, Vec<f64>)> = Vec::with_capacity(candidates.len());
            for (i, (&w, weight)) in candidates.iter().zip(&weights).enumerate() {
                let coeff = match (i, attract_only) {
                    (0, true) => 1.0,
                    (0, false) => 1.0 - weight / total,
                    _ => -weight / total,
                };
                let du = distance_gradient(&points[u], &points[w], c);
                let dw = distance_gradient(&points[w], &points[u], c);
                grad_u.iter_mut().zip(&du).for_each(|(g, d)| *g += coeff * d);
                candidate_grads.push((w, dw.into_iter().map(|d| coeff * d).collect()));
            }

            let updated = riemannian_update(&points[u], &grad_u, lr, c, config.eps)?;
            let mut staged = vec![(u, updated)];
            for (w, grad) in candidate_grads {
                staged.push((w, riemannian_update(&points[w], &grad, lr, c, config.eps)?));
            }
            for (id, point) in staged {
                points[id] = point;
                hook(id, &points[id]);
                updates += 1;
            }
        }
        epoch_losses.push(epoch_loss / pairs.len() as f64);
    }

    let model = PoincareModel::from_parts(entities, points, relations.clone(), config.clone())?;
    Ok((model, PoincareReport { epoch_losses, updates }))
}

/// Entity ids grouped so that tests can reason about depth: breadth-first
/// levels starting from type nodes. Entities unreachable from any type node
/// are omitted.
pub fn depth_from_roots(relations: &RelationSet) -> HashMap<String, usize> {
    let roots = relations.type_nodes();
    let mut depth: HashMap<String, usize> = roots.iter().map(|r| ((*r).to_owned(), 0)).collect();
    let mut frontier: HashSet<String> = roots.into_iter().map(str::to_owned).collect();
    let mut level = 0;
    while !frontier.is_empty() {
        level += 1;
        let mut next = HashSet::new();
        for (child, parent) in relations.pairs() {
            if frontier.contains(parent) && !depth.contains_key(child) {
                next.insert(child.clone());
            }
        }
        for child in &next {
            depth.insert(child.clone(), level);
        }
        frontier = next;
    }
    depth
}
