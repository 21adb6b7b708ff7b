//! Subcommand implementations for the `embedkit` binary.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};

use embedkit::corpus::{read_hyperlex_file, tokenize_lines, CooccurrenceMatrix, Corpus, Vocabulary};
use embedkit::eval::{classification_report, classify_names, evaluate_link_prediction, evaluate_reconstruction};
use embedkit::glove::{self, GloveConfig};
use embedkit::plot::PlotSpec;
use embedkit::poincare::{self, PoincareConfig};
use embedkit::store::{load_poincare, load_vectors, save_poincare, save_vectors};
use embedkit::word2vec::{self, Algorithm, W2VConfig};

/// Environment variable that replaces the built-in default seed.
pub const SEED_ENV: &str = "EMBEDKIT_SEED";
const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "embedkit", version, about = "Train and query small word and hierarchy embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train Word2Vec (CBOW or skip-gram) on a corpus with one sentence per line
    TrainW2v(TrainW2v),
    /// Train GloVe on a corpus with one sentence per line
    TrainGlove(TrainGlove),
    /// Train a Poincaré embedding of a HyperLex relation file
    TrainPoincare(TrainPoincare),
    /// Report reconstruction and link-prediction MR/MAP for a Poincaré model
    Eval(Eval),
    /// Nearest neighbours by cosine similarity in a vector file
    Neighbors(Neighbors),
    /// Predict entity types for names with a Poincaré model
    Predict(Predict),
    /// Write an SVG plot of a 2-dimensional model
    Plot(Plot),
}

#[derive(Debug, Args)]
pub struct Common {
    /// key=value file; command-line flags take precedence over it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Random seed (default 42, or the EMBEDKIT_SEED environment variable)
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Fon,
    Nobiin,
}

#[derive(Debug, Args)]
pub struct TrainW2v {
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub size: Option<u64>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub window: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    /// 0 for CBOW, 1 for skip-gram
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub sg: Option<u8>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: Option<u64>,
    /// Lowercase the corpus before tokenizing
    #[arg(long)]
    pub lowercase: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrainGlove {
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub dim: Option<u64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub weight_alpha: Option<f64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: Option<u64>,
    /// Co-occurrence window (default 10)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub window: Option<u64>,
    /// Minimum token count (default 1)
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Count every pair in the window as 1 instead of 1/distance
    #[arg(long)]
    pub no_distance_weighting: bool,
    #[arg(long)]
    pub lowercase: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrainPoincare {
    pub relations: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub dim: Option<u64>,
    #[arg(long)]
    pub curvature: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: Option<u64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub negatives: Option<u64>,
    #[arg(long)]
    pub burn_in_epochs: Option<u64>,
    #[arg(long)]
    pub burn_in_lr_factor: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Eval {
    pub model: PathBuf,
    /// Relations to reconstruct (defaults to those stored in the model)
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Held-out relations for link prediction
    #[arg(long)]
    pub test: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Neighbors {
    pub model: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub positives: Vec<String>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub topn: u64,
}

#[derive(Debug, Args)]
pub struct Predict {
    pub model: PathBuf,
    /// One name per line
    #[arg(long)]
    pub names: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub types: Vec<String>,
    /// One gold type per line, aligned with --names
    #[arg(long)]
    pub golds: Option<PathBuf>,
    /// Also write the full-precision report as JSON
    #[arg(long, requires = "golds")]
    pub report_json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PlotKind {
    Scatter,
    Hierarchy,
}

#[derive(Debug, Args)]
pub struct Plot {
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = PlotKind::Scatter)]
    pub kind: PlotKind,
}

/// How a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config keys or parameter values (exit 2).
    Usage(String),
    /// Unreadable or invalid input data (exit 1).
    Data(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "{msg}"),
            Failure::Data(err) => write!(f, "{err:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(err: E) -> Self {
        Failure::Data(err.into())
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Flat `key=value` settings from a config file.
struct FileConfig {
    values: BTreeMap<String, (usize, String)>,
    path: PathBuf,
}

impl FileConfig {
    fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self, Failure> {
        let mut values = BTreeMap::new();
        let Some(path) = path else {
            return Ok(FileConfig { values, path: PathBuf::new() });
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(usage(format!("{}:{}: expected key=value", path.display(), i + 1)));
            };
            let key = key.trim().replace('-', "_");
            if !allowed.contains(&key.as_str()) {
                return Err(usage(format!(
                    "{}:{}: unknown key '{key}' (expected one of: {})",
                    path.display(),
                    i + 1,
                    allowed.join(", ")
                )));
            }
            values.insert(key, (i + 1, value.trim().to_owned()));
        }
        Ok(FileConfig { values, path: path.to_owned() })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Failure> {
        self.values
            .get(key)
            .map(|(line, raw)| {
                raw.parse()
                    .map_err(|_| usage(format!("{}:{line}: invalid value {raw:?} for '{key}'", self.path.display())))
            })
            .transpose()
    }
}

fn seed(flag: Option<u64>, file: &FileConfig) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = file.get("seed")? {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw.trim().parse().map_err(|_| usage(format!("{SEED_ENV}={raw:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Overrides `target` from the file, then from the flag.
fn layer<T: FromStr>(target: &mut T, file: &FileConfig, key: &str, flag: Option<T>) -> Result<(), Failure> {
    if let Some(v) = file.get(key)? {
        *target = v;
    }
    if let Some(v) = flag {
        *target = v;
    }
    Ok(())
}

fn to_usize(v: Option<u64>) -> Option<usize> {
    v.map(|x| x as usize)
}

fn read_sentences(path: &Path, lowercase: bool) -> anyhow::Result<Vec<Vec<embedkit::corpus::Token>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading corpus {}", path.display()))?;
    Ok(tokenize_lines(&text, lowercase))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

const W2V_KEYS: [&str; 9] = ["preset", "size", "min_count", "alpha", "window", "workers", "sg", "epochs", "seed"];

pub fn w2v_config(args: &TrainW2v) -> Result<W2VConfig, Failure> {
    let file = FileConfig::load(args.common.config.as_deref(), &W2V_KEYS)?;
    let preset = match args.preset {
        Some(Preset::Fon) => Some("fon".to_owned()),
        Some(Preset::Nobiin) => Some("nobiin".to_owned()),
        None => file.get::<String>("preset")?,
    };
    let mut cfg = match preset {
        Some(name) => W2VConfig::preset(&name).ok_or_else(|| usage(format!("unknown preset '{name}'")))?,
        None => W2VConfig::default(),
    };
    layer(&mut cfg.size, &file, "size", to_usize(args.size))?;
    layer(&mut cfg.min_count, &file, "min_count", args.min_count)?;
    layer(&mut cfg.alpha, &file, "alpha", args.alpha)?;
    layer(&mut cfg.window, &file, "window", to_usize(args.window))?;
    layer(&mut cfg.workers, &file, "workers", to_usize(args.workers))?;
    layer(&mut cfg.epochs, &file, "epochs", to_usize(args.epochs))?;
    let mut sg = cfg.sg.sg();
    layer(&mut sg, &file, "sg", args.sg)?;
    cfg.sg = Algorithm::from_sg(sg).ok_or_else(|| usage(format!("sg must be 0 or 1, got {sg}")))?;
    cfg.seed = seed(args.common.seed, &file)?;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn train_w2v(args: &TrainW2v, out: &mut dyn Write) -> Outcome {
    let cfg = w2v_config(args)?;
    let sentences = read_sentences(&args.corpus, args.lowercase)?;
    let (model, report) = word2vec::train(&sentences, &cfg)?;
    let mut sink = create(&args.out)?;
    save_vectors(&model.vectors(), &mut sink)?;
    sink.flush()?;
    writeln!(out, "vocabulary size: {}", model.vocab().len())?;
    writeln!(out, "epochs: {}", cfg.epochs)?;
    writeln!(out, "final average loss: {:.6}", report.final_loss())?;
    writeln!(
        out,
        "config: size={} min_count={} alpha={} window={} workers={} sg={} epochs={} seed={}",
        cfg.size,
        cfg.min_count,
        cfg.alpha,
        cfg.window,
        cfg.workers,
        cfg.sg.sg(),
        cfg.epochs,
        cfg.seed
    )?;
    Ok(())
}

const GLOVE_KEYS: [&str; 9] =
    ["dim", "x_max", "weight_alpha", "learning_rate", "epochs", "window", "min_count", "distance_weighting", "seed"];

struct GloveRun {
    cfg: GloveConfig,
    window: usize,
    min_count: u64,
    distance_weighting: bool,
}

fn glove_settings(args: &TrainGlove) -> Result<GloveRun, Failure> {
    let file = FileConfig::load(args.common.config.as_deref(), &GLOVE_KEYS)?;
    let mut cfg = GloveConfig::default();
    layer(&mut cfg.dim, &file, "dim", to_usize(args.dim))?;
    layer(&mut cfg.x_max, &file, "x_max", args.x_max)?;
    layer(&mut cfg.weight_alpha, &file, "weight_alpha", args.weight_alpha)?;
    layer(&mut cfg.learning_rate, &file, "learning_rate", args.learning_rate)?;
    layer(&mut cfg.epochs, &file, "epochs", to_usize(args.epochs))?;
    cfg.seed = seed(args.common.seed, &file)?;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let mut window = 10;
    layer(&mut window, &file, "window", to_usize(args.window))?;
    let mut min_count = 1;
    layer(&mut min_count, &file, "min_count", args.min_count)?;
    let mut distance_weighting = true;
    layer(&mut distance_weighting, &file, "distance_weighting", args.no_distance_weighting.then_some(false))?;
    if window == 0 || min_count == 0 {
        return Err(usage("window and min_count must be at least 1"));
    }
    Ok(GloveRun { cfg, window, min_count, distance_weighting })
}

fn train_glove(args: &TrainGlove, out: &mut dyn Write) -> Outcome {
    let run = glove_settings(args)?;
    let sentences = read_sentences(&args.corpus, args.lowercase)?;
    let vocab = Vocabulary::build(&sentences, run.min_count)?;
    let corpus = Corpus::from_tokens(&vocab, &sentences);
    let matrix = CooccurrenceMatrix::build(&corpus, vocab.len(), run.window, run.distance_weighting)?;
    let (model, report) = glove::train(vocab, &matrix, &run.cfg)?;
    let mut sink = create(&args.out)?;
    save_vectors(&model.export_vectors(), &mut sink)?;
    sink.flush()?;
    writeln!(out, "vocabulary size: {}", model.vocab().len())?;
    writeln!(out, "co-occurrence entries: {}", matrix.nnz())?;
    writeln!(out, "epochs: {}", run.cfg.epochs)?;
    writeln!(
        out,
        "loss: {:.6} -> {:.6}",
        report.initial_loss,
        report.epoch_losses.last().copied().unwrap_or(report.initial_loss)
    )?;
    Ok(())
}

const POINCARE_KEYS: [&str; 9] =
    ["dim", "curvature", "epochs", "learning_rate", "negatives", "burn_in_epochs", "burn_in_lr_factor", "eps", "seed"];

pub fn poincare_config(args: &TrainPoincare) -> Result<PoincareConfig, Failure> {
    let file = FileConfig::load(args.common.config.as_deref(), &POINCARE_KEYS)?;
    let mut cfg = PoincareConfig::default();
    layer(&mut cfg.dim, &file, "dim", to_usize(args.dim))?;
    layer(&mut cfg.curvature, &file, "curvature", args.curvature)?;
    layer(&mut cfg.epochs, &file, "epochs", to_usize(args.epochs))?;
    layer(&mut cfg.learning_rate, &file, "learning_rate", args.learning_rate)?;
    layer(&mut cfg.negatives, &file, "negatives", to_usize(args.negatives))?;
    layer(&mut cfg.burn_in_epochs, &file, "burn_in_epochs", to_usize(args.burn_in_epochs))?;
    layer(&mut cfg.burn_in_lr_factor, &file, "burn_in_lr_factor", args.burn_in_lr_factor)?;
    layer(&mut cfg.eps, &file, "eps", args.eps)?;
    cfg.seed = seed(args.common.seed, &file)?;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn train_poincare(args: &TrainPoincare, out: &mut dyn Write) -> Outcome {
    let cfg = poincare_config(args)?;
    let relations = read_hyperlex_file(&args.relations)
        .with_context(|| format!("reading relations {}", args.relations.display()))?;
    let (model, _) = poincare::train(&relations, &cfg)?;
    let mut sink = create(&args.out)?;
    save_poincare(&model, &mut sink)?;
    sink.flush()?;
    let report = evaluate_reconstruction(&model, &relations)?;
    writeln!(out, "entities: {}", model.len())?;
    writeln!(out, "relations: {}", relations.len())?;
    writeln!(out, "epochs: {}", cfg.epochs)?;
    writeln!(out, "Reconstruction {report}")?;
    Ok(())
}

fn open_poincare(path: &Path) -> anyhow::Result<poincare::PoincareModel> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    load_poincare(std::io::BufReader::new(file)).with_context(|| format!("loading {}", path.display()))
}

fn open_vectors(path: &Path) -> anyhow::Result<embedkit::vectors::KeyedVectors> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    load_vectors(std::io::BufReader::new(file)).with_context(|| format!("loading {}", path.display()))
}

fn eval(args: &Eval, out: &mut dyn Write) -> Outcome {
    let model = open_poincare(&args.model)?;
    let train = match &args.train {
        Some(path) => read_hyperlex_file(path).with_context(|| format!("reading {}", path.display()))?,
        None => model.relations().clone(),
    };
    let reconstruction = evaluate_reconstruction(&model, &train)?;
    writeln!(out, "Reconstruction {reconstruction}")?;
    if let Some(path) = &args.test {
        let test = read_hyperlex_file(path).with_context(|| format!("reading {}", path.display()))?;
        writeln!(out, "Link prediction {}", evaluate_link_prediction(&model, &test)?)?;
    }
    Ok(())
}

fn neighbors(args: &Neighbors, out: &mut dyn Write) -> Outcome {
    let vectors = open_vectors(&args.model)?;
    let positives: Vec<&str> = args.positives.iter().map(|p| p.trim()).filter(|p| !p.is_empty()).collect();
    if positives.is_empty() {
        return Err(usage("--positives needs at least one token"));
    }
    for (token, score) in vectors.most_similar(&positives, args.topn as usize)? {
        writeln!(out, "{token} {score:.5}")?;
    }
    Ok(())
}

fn read_list(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_owned).collect())
}

fn predict(args: &Predict, out: &mut dyn Write) -> Outcome {
    let model = open_poincare(&args.model)?;
    let names = read_list(&args.names)?;
    let types: Vec<&str> = args.types.iter().map(|t| t.trim()).filter(|t| !t.is_empty()).collect();
    if types.is_empty() {
        return Err(usage("--types needs at least one type"));
    }
    let predictions = classify_names(&model, &names, &types)?;
    for p in &predictions {
        writeln!(out, "{}\t{}", p.name, p.predicted)?;
    }
    let fallbacks = predictions.iter().filter(|p| p.fallback).count();
    writeln!(out, "fallback: {fallbacks} of {} names not in the model", predictions.len())?;
    if let Some(path) = &args.golds {
        let golds = read_list(path)?;
        let preds: Vec<&str> = predictions.iter().map(|p| p.predicted.as_str()).collect();
        let report = classification_report(&golds.iter().map(String::as_str).collect::<Vec<_>>(), &preds)?;
        writeln!(out)?;
        write!(out, "{}", report.render())?;
        if let Some(json) = &args.report_json {
            let mut sink = create(json)?;
            serde_json::to_writer_pretty(&mut sink, &report)?;
            sink.write_all(b"\n")?;
            sink.flush()?;
        }
    }
    Ok(())
}

/// Poincaré files start with `key=value` metadata; vector files with `V dim`.
fn is_poincare_file(path: &Path) -> anyhow::Result<bool> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let first = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    Ok(first.contains(&b'='))
}

fn plot(args: &Plot, out: &mut dyn Write) -> Outcome {
    let spec = if is_poincare_file(&args.model)? {
        let model = open_poincare(&args.model)?;
        match args.kind {
            PlotKind::Scatter => PlotSpec::poincare_scatter(&model)?,
            PlotKind::Hierarchy => PlotSpec::hierarchy(&model)?,
        }
    } else {
        if let PlotKind::Hierarchy = args.kind {
            return Err(anyhow::anyhow!("hierarchy plots need a Poincaré model").into());
        }
        PlotSpec::scatter(&open_vectors(&args.model)?)?
    };
    let svg = spec.to_svg()?;
    fs::write(&args.out, &svg).with_context(|| format!("writing {}", args.out.display()))?;
    writeln!(out, "wrote {} points to {}", spec.points.len(), args.out.display())?;
    Ok(())
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::TrainW2v(a) => train_w2v(a, out),
        Command::TrainGlove(a) => train_glove(a, out),
        Command::TrainPoincare(a) => train_poincare(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Neighbors(a) => neighbors(a, out),
        Command::Predict(a) => predict(a, out),
        Command::Plot(a) => plot(a, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("embedkit").chain(args.iter().copied())).unwrap()
    }

    fn w2v(args: &[&str]) -> TrainW2v {
        match parse(&[&["train-w2v", "c.txt", "--out", "m.vec"], args].concat()).command {
            Command::TrainW2v(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn presets_and_flag_precedence() {
        let fon = w2v_config(&w2v(&["--preset", "fon", "--seed", "1"])).unwrap();
        assert_eq!(
            (fon.size, fon.min_count, fon.alpha, fon.window, fon.workers, fon.sg),
            (100, 5, 0.5, 5, 3, Algorithm::Cbow)
        );
        let nobiin = w2v_config(&w2v(&["--preset", "nobiin", "--seed", "1"])).unwrap();
        assert_eq!((nobiin.size, nobiin.min_count, nobiin.alpha, nobiin.window), (200, 1, 0.025, 15));
        let sized = w2v_config(&w2v(&["--size", "10", "--preset", "fon", "--seed", "1"])).unwrap();
        assert_eq!((sized.size, sized.alpha), (10, 0.5));
    }

    #[test]
    fn file_sits_between_flags_and_preset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "# comment\npreset=nobiin\nsize = 7\nwindow=3\nseed=9\n").unwrap();
        let path = path.to_str().unwrap();
        let cfg = w2v_config(&w2v(&["--config", path, "--window", "4"])).unwrap();
        assert_eq!((cfg.size, cfg.window, cfg.alpha, cfg.seed), (7, 4, 0.025, 9));
    }

    #[test]
    fn unknown_config_key_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        fs::write(&path, "sizee=7\n").unwrap();
        let err = w2v_config(&w2v(&["--config", path.to_str().unwrap()])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("sizee"));
    }

    #[test]
    fn poincare_defaults() {
        let args = match parse(&["train-poincare", "r.tsv", "--out", "m.txt", "--seed", "3"]).command {
            Command::TrainPoincare(a) => a,
            _ => unreachable!(),
        };
        let cfg = poincare_config(&args).unwrap();
        assert_eq!((cfg.epochs, cfg.dim, cfg.curvature, cfg.seed), (2000, 2, 1.0, 3));
    }

    #[test]
    fn zero_sizes_are_rejected_by_the_parser() {
        for args in [
            &["train-poincare", "r.tsv", "--out", "m", "--dim", "0"][..],
            &["neighbors", "m.vec", "--positives", "a", "--topn", "0"],
        ] {
            let err = Cli::try_parse_from(std::iter::once("embedkit").chain(args.iter().copied())).unwrap_err();
            assert_eq!(err.exit_code(), 2);
        }
    }
}
