//! GloVe: weighted least squares on log co-occurrence counts.
//!
//! For every stored cell `A[t][u] > 0` the model fits
//! `v_t · ṽ_u + b_t + b̃_u ≈ log A[t][u]`, weighting the squared residual by
//! `f(A[t][u])`. Cells with no co-occurrence are never visited, which is
//! consistent with `f(0) = 0`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{CooccurrenceMatrix, Vocabulary};
use crate::vectors::{dot, KeyedVectors, Matrix};

#[derive(Debug, Error)]
pub enum GloveError {
    #[error("co-occurrence row {0} sums to zero")]
    ZeroRowSum(usize),
    #[error("co-occurrence matrix has no nonzero entry")]
    EmptyMatrix,
    #[error("matrix covers {matrix} words but the vocabulary has {vocab}")]
    SizeMismatch { matrix: usize, vocab: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GloveConfig {
    pub dim: usize,
    /// Count at which the weight saturates at 1.
    pub x_max: f64,
    /// Exponent of the weighting function, in (0, 1).
    pub weight_alpha: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for GloveConfig {
    fn default() -> Self {
        GloveConfig { dim: 50, x_max: 100.0, weight_alpha: 0.75, learning_rate: 0.05, epochs: 50, seed: 42 }
    }
}

impl GloveConfig {
    pub fn validate(&self) -> Result<(), GloveError> {
        let fail = |msg: &str| Err(GloveError::InvalidConfig(msg.to_owned()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return fail("x_max must be positive");
        }
        if !(self.weight_alpha > 0.0 && self.weight_alpha < 1.0) {
            return fail("weight_alpha must lie strictly between 0 and 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        Ok(())
    }
}

/// `P[t][u] = A[t][u] / A[t]`.
pub fn cooccur_probability(matrix: &CooccurrenceMatrix, t: usize, u: usize) -> Result<f64, GloveError> {
    let row = matrix.row_sum(t);
    if row <= 0.0 {
        return Err(GloveError::ZeroRowSum(t));
    }
    Ok(matrix.get(t, u) / row)
}

/// `(x / x_max)^alpha` below `x_max`, 1 from there on.
pub fn weight_f(x: f64, x_max: f64, alpha: f64) -> f64 {
    if x < x_max {
        (x / x_max).powf(alpha)
    } else {
        1.0
    }
}

/// Gradient of one cell's term of the loss.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryGradient {
    pub word: Vec<f64>,
    pub context: Vec<f64>,
    pub word_bias: f64,
    pub context_bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GloveModel {
    vocab: Vocabulary,
    word: Matrix,
    context: Matrix,
    word_bias: Vec<f64>,
    context_bias: Vec<f64>,
    // AdaGrad accumulators
    word_sq: Matrix,
    context_sq: Matrix,
    word_bias_sq: Vec<f64>,
    context_bias_sq: Vec<f64>,
}

impl GloveModel {
    /// Vectors uniform in `(-0.5/dim, 0.5/dim)`, zero biases, accumulators at 1.
    pub fn initialize(vocab: Vocabulary, dim: usize, rng: &mut impl Rng) -> Self {
        let v = vocab.len();
        let bound = 0.5 / dim as f64;
        let word = Matrix::from_fn(v, dim, |_, _| rng.random_range(-bound..bound));
        let context = Matrix::from_fn(v, dim, |_, _| rng.random_range(-bound..bound));
        Self::from_parameters(vocab, word, context, vec![0.0; v], vec![0.0; v])
    }

    /// Panics if shapes disagree with the vocabulary.
    pub fn from_parameters(
        vocab: Vocabulary,
        word: Matrix,
        context: Matrix,
        word_bias: Vec<f64>,
        context_bias: Vec<f64>,
    ) -> Self {
        let v = vocab.len();
        assert!(word.rows() == v && context.rows() == v && word.cols() == context.cols());
        assert!(word_bias.len() == v && context_bias.len() == v);
        let dim = word.cols();
        GloveModel {
            vocab,
            word,
            context,
            word_bias,
            context_bias,
            word_sq: Matrix::from_fn(v, dim, |_, _| 1.0),
            context_sq: Matrix::from_fn(v, dim, |_, _| 1.0),
            word_bias_sq: vec![1.0; v],
            context_bias_sq: vec![1.0; v],
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.word.cols()
    }

    pub fn word_vectors(&self) -> &Matrix {
        &self.word
    }

    pub fn context_vectors(&self) -> &Matrix {
        &self.context
    }

    pub fn word_bias(&self) -> &[f64] {
        &self.word_bias
    }

    pub fn context_bias(&self) -> &[f64] {
        &self.context_bias
    }

    pub fn is_finite(&self) -> bool {
        self.word.is_finite()
            && self.context.is_finite()
            && self.word_bias.iter().chain(&self.context_bias).all(|x| x.is_finite())
    }

    /// Swaps word and context parameters.
    pub fn transposed(&self) -> Self {
        let mut m = self.clone();
        std::mem::swap(&mut m.word, &mut m.context);
        std::mem::swap(&mut m.word_bias, &mut m.context_bias);
        std::mem::swap(&mut m.word_sq, &mut m.context_sq);
        std::mem::swap(&mut m.word_bias_sq, &mut m.context_bias_sq);
        m
    }

    fn residual(&self, t: usize, u: usize, count: f64) -> f64 {
        dot(self.word.row(t), self.context.row(u)) + self.word_bias[t] + self.context_bias[u] - count.ln()
    }

    /// `f(x) · (v_t · ṽ_u + b_t + b̃_u − log x)²`.
    pub fn entry_loss(&self, t: usize, u: usize, count: f64, config: &GloveConfig) -> f64 {
        let r = self.residual(t, u, count);
        weight_f(count, config.x_max, config.weight_alpha) * r * r
    }

    pub fn entry_gradient(&self, t: usize, u: usize, count: f64, config: &GloveConfig) -> EntryGradient {
        let g = 2.0 * weight_f(count, config.x_max, config.weight_alpha) * self.residual(t, u, count);
        EntryGradient {
            word: self.context.row(u).iter().map(|c| g * c).collect(),
            context: self.word.row(t).iter().map(|w| g * w).collect(),
            word_bias: g,
            context_bias: g,
        }
    }

    fn adagrad_step(&mut self, t: usize, u: usize, count: f64, config: &GloveConfig) {
        let grad = self.entry_gradient(t, u, count, config);
        let lr = config.learning_rate;
        let step = |param: &mut f64, acc: &mut f64, g: f64| {
            *acc += g * g;
            *param -= lr * g / acc.sqrt();
        };
        for ((p, a), g) in self.word.row_mut(t).iter_mut().zip(self.word_sq.row_mut(t)).zip(&grad.word) {
            step(p, a, *g);
        }
        for ((p, a), g) in self.context.row_mut(u).iter_mut().zip(self.context_sq.row_mut(u)).zip(&grad.context) {
            step(p, a, *g);
        }
        step(&mut self.word_bias[t], &mut self.word_bias_sq[t], grad.word_bias);
        step(&mut self.context_bias[u], &mut self.context_bias_sq[u], grad.context_bias);
    }

    /// `(v_t + ṽ_t) / 2` for every token.
    pub fn export_vectors(&self) -> KeyedVectors {
        let averaged =
            Matrix::from_fn(self.word.rows(), self.dim(), |r, c| (self.word.row(r)[c] + self.context.row(r)[c]) / 2.0);
        KeyedVectors::new(self.vocab.tokens().map(str::to_owned).collect(), averaged)
    }
}

/// Total weighted squared error over the stored cells of `matrix`.
pub fn loss_j(model: &GloveModel, matrix: &CooccurrenceMatrix, config: &GloveConfig) -> Result<f64, GloveError> {
    if matrix.is_empty() {
        return Err(GloveError::EmptyMatrix);
    }
    Ok(matrix.entries().iter().map(|&(t, u, x)| model.entry_loss(t, u, x, config)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GloveReport {
    pub initial_loss: f64,
    /// Loss after each epoch.
    pub epoch_losses: Vec<f64>,
}

/// AdaGrad over the stored cells, visited in a freshly shuffled order each
/// epoch. Deterministic for a fixed seed.
pub fn train(
    vocab: Vocabulary,
    matrix: &CooccurrenceMatrix,
    config: &GloveConfig,
) -> Result<(GloveModel, GloveReport), GloveError> {
    config.validate()?;
    if matrix.is_empty() {
        return Err(GloveError::EmptyMatrix);
    }
    if matrix.size() > vocab.len() {
        return Err(GloveError::SizeMismatch { matrix: matrix.size(), vocab: vocab.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = GloveModel::initialize(vocab, config.dim, &mut rng);
    let initial_loss = loss_j(&model, matrix, config)?;
    let mut order: Vec<usize> = (0..matrix.nnz()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (t, u, x) = matrix.entries()[i];
            model.adagrad_step(t, u, x, config);
        }
        epoch_losses.push(loss_j(&model, matrix, config)?);
    }
    Ok((model, GloveReport { initial_loss, epoch_losses }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;
    use proptest::prelude::*;

    fn vocab(n: usize) -> Vocabulary {
        Vocabulary::from_entries((0..n).map(|i| (Token::new(&format!("w{i}")).unwrap(), 1)).collect(), 1).unwrap()
    }

    fn zero_model(n: usize, dim: usize) -> GloveModel {
        GloveModel::from_parameters(vocab(n), Matrix::zeros(n, dim), Matrix::zeros(n, dim), vec![0.0; n], vec![0.0; n])
    }

    #[test]
    fn probability_examples() {
        let m = CooccurrenceMatrix::from_triples(3, &[(0, 1, 3.0), (0, 2, 3.0)]);
        assert_eq!(cooccur_probability(&m, 0, 1).unwrap(), 0.5);
        assert_eq!(cooccur_probability(&m, 1, 2).unwrap(), 0.0);
        let m = CooccurrenceMatrix::from_triples(3, &[(0, 1, 1.0)]);
        assert!(matches!(cooccur_probability(&m, 2, 0), Err(GloveError::ZeroRowSum(2))));
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight_f(100.0, 100.0, 0.75), 1.0);
        assert_eq!(weight_f(250.0, 100.0, 0.75), 1.0);
        assert_eq!(weight_f(0.0, 100.0, 0.75), 0.0);
        assert!((weight_f(10.0, 100.0, 0.75) - 0.17783).abs() < 1e-5);
    }

    #[test]
    fn loss_examples() {
        let config = GloveConfig::default();
        let m = CooccurrenceMatrix::from_triples(1, &[(0, 0, 1.0)]);
        assert_eq!(loss_j(&zero_model(1, 2), &m, &config).unwrap(), 0.0);

        let e = std::f64::consts::E;
        let m = CooccurrenceMatrix::from_triples(1, &[(0, 0, e)]);
        let w = weight_f(e, config.x_max, config.weight_alpha);
        assert!((loss_j(&zero_model(1, 2), &m, &config).unwrap() - w).abs() < 1e-15);

        assert!(matches!(
            loss_j(&zero_model(1, 2), &CooccurrenceMatrix::from_triples(1, &[]), &config),
            Err(GloveError::EmptyMatrix)
        ));
    }

    #[test]
    fn exact_fit_has_zero_loss() {
        // biases alone reproduce log A when b_t + b̃_u = log A[t][u]
        let m = CooccurrenceMatrix::from_triples(2, &[(0, 1, 4.0), (0, 0, 4.0), (1, 1, 4.0)]);
        let half = 4.0f64.ln() / 2.0;
        let model = GloveModel::from_parameters(
            vocab(2),
            Matrix::zeros(2, 3),
            Matrix::zeros(2, 3),
            vec![half; 2],
            vec![half; 2],
        );
        assert!(loss_j(&model, &m, &GloveConfig::default()).unwrap() < 1e-9);
    }

    #[test]
    fn export_averages_word_and_context() {
        let model = GloveModel::from_parameters(
            vocab(1),
            Matrix::from_rows(&[vec![1.0, 0.0]]),
            Matrix::from_rows(&[vec![0.0, 1.0]]),
            vec![0.0],
            vec![0.0],
        );
        assert_eq!(model.export_vectors().get("w0").unwrap(), [0.5, 0.5]);

        let same = Matrix::from_rows(&[vec![0.25, -3.0]]);
        let model = GloveModel::from_parameters(vocab(1), same.clone(), same, vec![0.0], vec![0.0]);
        assert_eq!(model.export_vectors().get("w0").unwrap(), [0.25, -3.0]);
    }

    #[test]
    fn training_rejects_bad_input() {
        let m = CooccurrenceMatrix::from_triples(2, &[]);
        assert!(matches!(train(vocab(2), &m, &GloveConfig::default()), Err(GloveError::EmptyMatrix)));
        let m = CooccurrenceMatrix::from_triples(3, &[(0, 2, 1.0)]);
        assert!(matches!(train(vocab(2), &m, &GloveConfig::default()), Err(GloveError::SizeMismatch { .. })));
        let bad = GloveConfig { weight_alpha: 1.0, ..GloveConfig::default() };
        assert!(matches!(train(vocab(3), &m, &bad), Err(GloveError::InvalidConfig(_))));
    }

    #[test]
    fn training_is_deterministic() {
        let m = CooccurrenceMatrix::from_triples(4, &[(0, 1, 3.0), (1, 2, 1.5), (2, 3, 7.0), (0, 3, 0.5)]);
        let config = GloveConfig { dim: 3, epochs: 20, ..GloveConfig::default() };
        let (a, ra) = train(vocab(4), &m, &config).unwrap();
        let (b, rb) = train(vocab(4), &m, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert!(ra.epoch_losses.last().unwrap() <= &ra.initial_loss);
    }

    proptest! {
        #[test]
        fn weight_is_monotone(a in 0.0f64..300.0, b in 0.0f64..300.0, alpha in 0.05f64..0.95) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(weight_f(lo, 100.0, alpha) <= weight_f(hi, 100.0, alpha));
        }

        #[test]
        fn loss_is_symmetric_under_role_swap(
            seed in 0u64..1000,
            counts in prop::collection::vec(0.5f64..20.0, 6),
        ) {
            let triples = [(0, 1, counts[0]), (0, 2, counts[1]), (1, 2, counts[2]), (0, 0, counts[3]), (2, 3, counts[4]), (3, 3, counts[5])];
            let m = CooccurrenceMatrix::from_triples(4, &triples);
            let model = GloveModel::initialize(vocab(4), 3, &mut ChaCha8Rng::seed_from_u64(seed));
            let config = GloveConfig::default();
            let a = loss_j(&model, &m, &config).unwrap();
            let b = loss_j(&model.transposed(), &m, &config).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }
}
