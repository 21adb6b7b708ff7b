//! Word2Vec with a full softmax output layer.
//!
//! Two variants are supported: CBOW, which predicts a word from the mean of
//! its context vectors (a single context word is the one-word model), and
//! skip-gram, which predicts every context word from the centre word.
//!
//! The input matrix `W` is `V × N`. The output matrix `W'` is `N × V`; it is
//! stored transposed, one row per word, so `output.row(j)` is the output
//! vector of word `j`.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, Token, Vocabulary};
use crate::vectors::{dot, KeyedVectors, Matrix, UnknownTerm};

#[derive(Debug, Error)]
pub enum Word2VecError {
    #[error("context is empty")]
    EmptyContext,
    #[error("word id {id} is outside a vocabulary of {vocab_size}")]
    IdOutOfRange { id: usize, vocab_size: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix shape {rows}x{cols} does not match vocabulary {vocab_size} and size {size}")]
    ShapeMismatch { rows: usize, cols: usize, vocab_size: usize, size: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    UnknownTerm(#[from] UnknownTerm),
}

/// Training algorithm selector; `sg = 0` is CBOW, `sg = 1` skip-gram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    #[default]
    Cbow,
    SkipGram,
}

impl Algorithm {
    pub fn from_sg(sg: u8) -> Option<Self> {
        match sg {
            0 => Some(Algorithm::Cbow),
            1 => Some(Algorithm::SkipGram),
            _ => None,
        }
    }

    pub fn sg(self) -> u8 {
        match self {
            Algorithm::Cbow => 0,
            Algorithm::SkipGram => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct W2VConfig {
    /// Embedding dimension N.
    pub size: usize,
    pub min_count: u64,
    /// Constant learning rate.
    pub alpha: f64,
    /// Maximum distance between a target word and a context word.
    pub window: usize,
    pub workers: usize,
    pub sg: Algorithm,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for W2VConfig {
    fn default() -> Self {
        W2VConfig {
            size: 100,
            min_count: 5,
            alpha: 0.025,
            window: 5,
            workers: 1,
            sg: Algorithm::Cbow,
            epochs: 5,
            seed: 42,
        }
    }
}

impl W2VConfig {
    /// Hyperparameters used for the Fon model.
    pub fn fon() -> Self {
        W2VConfig { size: 100, min_count: 5, alpha: 0.5, window: 5, workers: 3, sg: Algorithm::Cbow, ..Self::default() }
    }

    /// Hyperparameters used for the Nobiin model.
    pub fn nobiin() -> Self {
        W2VConfig {
            size: 200,
            min_count: 1,
            alpha: 0.025,
            window: 15,
            workers: 3,
            sg: Algorithm::Cbow,
            ..Self::default()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "fon" => Some(Self::fon()),
            "nobiin" => Some(Self::nobiin()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), Word2VecError> {
        let fail = |msg: &str| Err(Word2VecError::InvalidConfig(msg.to_owned()));
        if self.size == 0 {
            return fail("size must be at least 1");
        }
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return fail("alpha must be a positive finite number");
        }
        if self.min_count == 0 {
            return fail("min_count must be at least 1");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        Ok(())
    }
}

/// Numerically stable softmax: the maximum logit is subtracted first.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&o| (o - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Gradient of a single training example.
///
/// The output-layer gradient is the outer product `coeff ⊗ direction`: the
/// gradient for output vector `j` is `output_coeff[j] * output_direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    /// Input-row gradients, one entry per distinct id.
    pub input: Vec<(usize, Vec<f64>)>,
    pub output_coeff: Vec<f64>,
    pub output_direction: Vec<f64>,
}

impl Gradient {
    pub fn output_row(&self, j: usize) -> Vec<f64> {
        self.output_direction.iter().map(|d| d * self.output_coeff[j]).collect()
    }

    pub fn input_row(&self, id: usize) -> Option<&[f64]> {
        self.input.iter().find(|(i, _)| *i == id).map(|(_, g)| g.as_slice())
    }
}

/// Read and write access to the two weight matrices.
trait Params {
    fn dim(&self) -> usize;
    fn vocab_size(&self) -> usize;
    fn read_input(&self, id: usize, out: &mut [f64]);
    fn read_output(&self, id: usize, out: &mut [f64]);
    fn add_input(&mut self, id: usize, delta: &[f64], scale: f64);
    fn add_output(&mut self, id: usize, delta: &[f64], scale: f64);
}

struct DenseParams<'a> {
    input: &'a mut Matrix,
    output: &'a mut Matrix,
}

impl Params for DenseParams<'_> {
    fn dim(&self) -> usize {
        self.input.cols()
    }
    fn vocab_size(&self) -> usize {
        self.input.rows()
    }
    fn read_input(&self, id: usize, out: &mut [f64]) {
        out.copy_from_slice(self.input.row(id));
    }
    fn read_output(&self, id: usize, out: &mut [f64]) {
        out.copy_from_slice(self.output.row(id));
    }
    fn add_input(&mut self, id: usize, delta: &[f64], scale: f64) {
        for (w, d) in self.input.row_mut(id).iter_mut().zip(delta) {
            *w += scale * d;
        }
    }
    fn add_output(&mut self, id: usize, delta: &[f64], scale: f64) {
        for (w, d) in self.output.row_mut(id).iter_mut().zip(delta) {
            *w += scale * d;
        }
    }
}

/// Weights shared between worker threads without locks. Reads and writes
/// of individual coordinates are atomic, but read-modify-write sequences
/// race freely, so results depend on scheduling.
struct SharedParams {
    dim: usize,
    vocab_size: usize,
    input: Vec<AtomicU64>,
    output: Vec<AtomicU64>,
}

impl SharedParams {
    fn new(input: &Matrix, output: &Matrix) -> Self {
        let wrap = |m: &Matrix| m.as_slice().iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        SharedParams { dim: input.cols(), vocab_size: input.rows(), input: wrap(input), output: wrap(output) }
    }

    fn write_back(&self, input: &mut Matrix, output: &mut Matrix) {
        for (dst, src) in input.as_mut_slice().iter_mut().zip(&self.input) {
            *dst = f64::from_bits(src.load(Ordering::Relaxed));
        }
        for (dst, src) in output.as_mut_slice().iter_mut().zip(&self.output) {
            *dst = f64::from_bits(src.load(Ordering::Relaxed));
        }
    }
}

struct SharedHandle<'a>(&'a SharedParams);

impl SharedHandle<'_> {
    fn read(cells: &[AtomicU64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add(cells: &[AtomicU64], delta: &[f64], scale: f64) {
        for (c, d) in cells.iter().zip(delta) {
            let current = f64::from_bits(c.load(Ordering::Relaxed));
            c.store((current + scale * d).to_bits(), Ordering::Relaxed);
        }
    }
}

impl Params for SharedHandle<'_> {
    fn dim(&self) -> usize {
        self.0.dim
    }
    fn vocab_size(&self) -> usize {
        self.0.vocab_size
    }
    fn read_input(&self, id: usize, out: &mut [f64]) {
        let n = self.0.dim;
        Self::read(&self.0.input[id * n..(id + 1) * n], out);
    }
    fn read_output(&self, id: usize, out: &mut [f64]) {
        let n = self.0.dim;
        Self::read(&self.0.output[id * n..(id + 1) * n], out);
    }
    fn add_input(&mut self, id: usize, delta: &[f64], scale: f64) {
        let n = self.0.dim;
        Self::add(&self.0.input[id * n..(id + 1) * n], delta, scale);
    }
    fn add_output(&mut self, id: usize, delta: &[f64], scale: f64) {
        let n = self.0.dim;
        Self::add(&self.0.output[id * n..(id + 1) * n], delta, scale);
    }
}

fn check_ids<P: Params>(p: &P, ids: &[usize]) -> Result<(), Word2VecError> {
    let vocab_size = p.vocab_size();
    match ids.iter().find(|&&id| id >= vocab_size) {
        Some(&id) => Err(Word2VecError::IdOutOfRange { id, vocab_size }),
        None => Ok(()),
    }
}

fn hidden_mean<P: Params>(p: &P, context: &[usize]) -> Result<Vec<f64>, Word2VecError> {
    if context.is_empty() {
        return Err(Word2VecError::EmptyContext);
    }
    check_ids(p, context)?;
    let n = p.dim();
    let mut h = vec![0.0; n];
    let mut row = vec![0.0; n];
    for &id in context {
        p.read_input(id, &mut row);
        for (acc, x) in h.iter_mut().zip(&row) {
            *acc += x;
        }
    }
    if context.len() > 1 {
        let c = context.len() as f64;
        h.iter_mut().for_each(|x| *x /= c);
    }
    Ok(h)
}

fn probabilities<P: Params>(p: &P, h: &[f64]) -> Vec<f64> {
    let mut row = vec![0.0; p.dim()];
    let logits: Vec<f64> = (0..p.vocab_size())
        .map(|j| {
            p.read_output(j, &mut row);
            dot(&row, h)
        })
        .collect();
    softmax(&logits)
}

/// `Σ_j coeff_j · z'_j`, the gradient reaching the hidden layer.
fn hidden_gradient<P: Params>(p: &P, coeff: &[f64]) -> Vec<f64> {
    let n = p.dim();
    let mut grad = vec![0.0; n];
    let mut row = vec![0.0; n];
    for (j, &e) in coeff.iter().enumerate() {
        if e != 0.0 {
            p.read_output(j, &mut row);
            for (g, z) in grad.iter_mut().zip(&row) {
                *g += e * z;
            }
        }
    }
    grad
}

fn cbow_gradient_of<P: Params>(p: &P, context: &[usize], target: usize) -> Result<(f64, Gradient), Word2VecError> {
    check_ids(p, &[target])?;
    let h = hidden_mean(p, context)?;
    let y = probabilities(p, &h);
    let loss = -y[target].ln();
    let mut coeff = y;
    coeff[target] -= 1.0;
    let eh = hidden_gradient(p, &coeff);
    let c = context.len() as f64;
    let mut input: Vec<(usize, Vec<f64>)> = Vec::new();
    for &id in context {
        match input.iter_mut().find(|(i, _)| *i == id) {
            Some((_, g)) => g.iter_mut().zip(&eh).for_each(|(g, e)| *g += e / c),
            None => input.push((id, eh.iter().map(|e| e / c).collect())),
        }
    }
    Ok((loss, Gradient { input, output_coeff: coeff, output_direction: h }))
}

fn skipgram_gradient_of<P: Params>(p: &P, target: usize, context: &[usize]) -> Result<(f64, Gradient), Word2VecError> {
    if context.is_empty() {
        return Err(Word2VecError::EmptyContext);
    }
    check_ids(p, context)?;
    let h = hidden_mean(p, &[target])?;
    let y = probabilities(p, &h);
    let loss = -context.iter().map(|&c| y[c].ln()).sum::<f64>();
    let c = context.len() as f64;
    let mut coeff: Vec<f64> = y.into_iter().map(|yj| c * yj).collect();
    for &ctx in context {
        coeff[ctx] -= 1.0;
    }
    let eh = hidden_gradient(p, &coeff);
    Ok((loss, Gradient { input: vec![(target, eh)], output_coeff: coeff, output_direction: h }))
}

fn apply_gradient<P: Params>(p: &mut P, grad: &Gradient, alpha: f64) {
    for (j, &e) in grad.output_coeff.iter().enumerate() {
        if e != 0.0 {
            p.add_output(j, &grad.output_direction, -alpha * e);
        }
    }
    for (id, g) in &grad.input {
        p.add_input(*id, g, -alpha);
    }
}

/// Positions within `window` of `i` on either side, clipped to the sentence.
pub fn context_window(sentence: &[usize], i: usize, window: usize) -> Vec<usize> {
    let start = i.saturating_sub(window);
    let end = (i + window + 1).min(sentence.len());
    (start..end).filter(|&j| j != i).map(|j| sentence[j]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct W2VModel {
    vocab: Vocabulary,
    input: Matrix,
    output: Matrix,
    config: W2VConfig,
}

impl W2VModel {
    /// Input weights uniform in `(-0.5/N, 0.5/N)`, output weights zero.
    pub fn initialize(vocab: Vocabulary, config: W2VConfig) -> Result<Self, Word2VecError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let n = config.size;
        let bound = 0.5 / n as f64;
        let input = Matrix::from_fn(vocab.len(), n, |_, _| rng.random_range(-bound..bound));
        let output = Matrix::zeros(vocab.len(), n);
        Ok(W2VModel { vocab, input, output, config })
    }

    /// `input` is `V × N`; `output` holds one output vector per row (`V × N`).
    pub fn from_parts(
        vocab: Vocabulary,
        input: Matrix,
        output: Matrix,
        config: W2VConfig,
    ) -> Result<Self, Word2VecError> {
        config.validate()?;
        for m in [&input, &output] {
            if m.rows() != vocab.len() || m.cols() != config.size {
                return Err(Word2VecError::ShapeMismatch {
                    rows: m.rows(),
                    cols: m.cols(),
                    vocab_size: vocab.len(),
                    size: config.size,
                });
            }
        }
        Ok(W2VModel { vocab, input, output, config })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn config(&self) -> &W2VConfig {
        &self.config
    }

    pub fn input(&self) -> &Matrix {
        &self.input
    }

    pub fn output(&self) -> &Matrix {
        &self.output
    }

    pub fn is_finite(&self) -> bool {
        self.input.is_finite() && self.output.is_finite()
    }

    fn dense(&mut self) -> DenseParams<'_> {
        DenseParams { input: &mut self.input, output: &mut self.output }
    }

    fn view(&self) -> ReadOnly<'_> {
        ReadOnly(self)
    }

    /// Hidden layer for a context: the mean of its input rows.
    pub fn hidden_cbow(&self, context: &[usize]) -> Result<Vec<f64>, Word2VecError> {
        hidden_mean(&self.view(), context)
    }

    /// Softmax over `o_j = z'_j · h` for every word `j`.
    pub fn output_softmax(&self, h: &[f64]) -> Vec<f64> {
        probabilities(&self.view(), h)
    }

    pub fn cbow_loss(&self, context: &[usize], target: usize) -> Result<f64, Word2VecError> {
        let y = self.output_softmax(&self.hidden_cbow(context)?);
        y.get(target).map(|p| -p.ln()).ok_or(Word2VecError::IdOutOfRange { id: target, vocab_size: self.vocab.len() })
    }

    pub fn cbow_gradient(&self, context: &[usize], target: usize) -> Result<(f64, Gradient), Word2VecError> {
        cbow_gradient_of(&self.view(), context, target)
    }

    pub fn skipgram_loss(&self, target: usize, context: &[usize]) -> Result<f64, Word2VecError> {
        if context.is_empty() {
            return Err(Word2VecError::EmptyContext);
        }
        let y = self.output_softmax(&self.hidden_cbow(&[target])?);
        context
            .iter()
            .map(|&c| {
                y.get(c).map(|p| -p.ln()).ok_or(Word2VecError::IdOutOfRange { id: c, vocab_size: self.vocab.len() })
            })
            .sum()
    }

    pub fn skipgram_gradient(&self, target: usize, context: &[usize]) -> Result<(f64, Gradient), Word2VecError> {
        skipgram_gradient_of(&self.view(), target, context)
    }

    /// One gradient step on `-log p(target | context)`; returns the loss
    /// before the update.
    pub fn train_step_cbow(&mut self, context: &[usize], target: usize, alpha: f64) -> Result<f64, Word2VecError> {
        let (loss, grad) = self.cbow_gradient(context, target)?;
        apply_gradient(&mut self.dense(), &grad, alpha);
        Ok(loss)
    }

    /// One gradient step on `-Σ_c log p(c | target)`; returns the loss before
    /// the update.
    pub fn train_step_skipgram(&mut self, target: usize, context: &[usize], alpha: f64) -> Result<f64, Word2VecError> {
        let (loss, grad) = self.skipgram_gradient(target, context)?;
        apply_gradient(&mut self.dense(), &grad, alpha);
        Ok(loss)
    }

    /// The learned word vectors (rows of `W`).
    pub fn vectors(&self) -> KeyedVectors {
        KeyedVectors::new(self.vocab.tokens().map(str::to_owned).collect(), self.input.clone())
    }

    pub fn most_similar(&self, positives: &[&str], topn: usize) -> Result<Vec<(String, f64)>, Word2VecError> {
        Ok(self.vectors().most_similar(positives, topn)?)
    }
}

struct ReadOnly<'a>(&'a W2VModel);

impl Params for ReadOnly<'_> {
    fn dim(&self) -> usize {
        self.0.input.cols()
    }
    fn vocab_size(&self) -> usize {
        self.0.input.rows()
    }
    fn read_input(&self, id: usize, out: &mut [f64]) {
        out.copy_from_slice(self.0.input.row(id));
    }
    fn read_output(&self, id: usize, out: &mut [f64]) {
        out.copy_from_slice(self.0.output.row(id));
    }
    fn add_input(&mut self, _: usize, _: &[f64], _: f64) {
        unreachable!("read-only view")
    }
    fn add_output(&mut self, _: usize, _: &[f64], _: f64) {
        unreachable!("read-only view")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean per-example loss of each epoch.
    pub epoch_losses: Vec<f64>,
    pub examples_per_epoch: usize,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        self.epoch_losses.last().copied().unwrap_or(f64::NAN)
    }
}

fn run_sentences<P: Params>(p: &mut P, sentences: &[&Vec<usize>], config: &W2VConfig) -> (f64, usize) {
    let mut total = 0.0;
    let mut examples = 0;
    for sentence in sentences {
        for i in 0..sentence.len() {
            let context = context_window(sentence, i, config.window);
            if context.is_empty() {
                continue;
            }
            let step = match config.sg {
                Algorithm::Cbow => cbow_gradient_of(p, &context, sentence[i]),
                Algorithm::SkipGram => skipgram_gradient_of(p, sentence[i], &context),
            };
            // ids come from the corpus, which was checked against the vocabulary
            let (loss, grad) = step.expect("corpus ids within vocabulary");
            apply_gradient(p, &grad, config.alpha);
            total += loss;
            examples += 1;
        }
    }
    (total, examples)
}

/// Builds the vocabulary with `config.min_count` and trains on the
/// surviving tokens.
pub fn train<S: AsRef<[Token]>>(sentences: &[S], config: &W2VConfig) -> Result<(W2VModel, TrainReport), Word2VecError> {
    config.validate()?;
    let vocab = Vocabulary::build(sentences, config.min_count)?;
    let corpus = Corpus::from_tokens(&vocab, sentences);
    train_corpus(vocab, &corpus, config)
}

/// Iterates `epochs × sentences × positions` with a constant learning rate.
/// With one worker the result is a pure function of the inputs and seed;
/// more workers shard sentences across threads that update shared weights
/// without synchronization.
pub fn train_corpus(
    vocab: Vocabulary,
    corpus: &Corpus,
    config: &W2VConfig,
) -> Result<(W2VModel, TrainReport), Word2VecError> {
    if corpus.id_bound() > vocab.len() {
        return Err(Word2VecError::IdOutOfRange { id: corpus.id_bound() - 1, vocab_size: vocab.len() });
    }
    let mut model = W2VModel::initialize(vocab, config.clone())?;
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut examples_per_epoch = 0;
    let sentences: Vec<&Vec<usize>> = corpus.sentences().iter().collect();

    if config.workers <= 1 {
        for _ in 0..config.epochs {
            let (total, examples) = run_sentences(&mut model.dense(), &sentences, config);
            examples_per_epoch = examples;
            epoch_losses.push(if examples > 0 { total / examples as f64 } else { 0.0 });
        }
    } else {
        let shared = SharedParams::new(&model.input, &model.output);
        let shards: Vec<Vec<&Vec<usize>>> =
            (0..config.workers).map(|w| sentences.iter().skip(w).step_by(config.workers).copied().collect()).collect();
        for _ in 0..config.epochs {
            let results: Vec<(f64, usize)> = std::thread::scope(|scope| {
                let handles: Vec<_> = shards
                    .iter()
                    .map(|shard| {
                        let shared = &shared;
                        scope.spawn(move || run_sentences(&mut SharedHandle(shared), shard, config))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            });
            let (total, examples) = results.iter().fold((0.0, 0), |(t, n), (lt, ln)| (t + lt, n + ln));
            examples_per_epoch = examples;
            epoch_losses.push(if examples > 0 { total / examples as f64 } else { 0.0 });
        }
        shared.write_back(&mut model.input, &mut model.output);
    }

    Ok((model, TrainReport { epoch_losses, examples_per_epoch }))
}
