use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn embedkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_embedkit")).args(args).env_remove("EMBEDKIT_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

struct Workspace(TempDir);

impl Workspace {
    fn new() -> Self {
        Workspace(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let path = self.0.path().join(name);
        fs::write(&path, contents).unwrap();
        path.to_str().unwrap().to_owned()
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).to_str().unwrap().to_owned()
    }
}

fn read(path: &str) -> Vec<u8> {
    fs::read(Path::new(path)).unwrap()
}

const CORPUS: &str = "Mɛ̀ ɖé wá xwé\nNǔ ɖé ɖò xwé mɛ̀\nMɛ̀ ɖé yì àxì mɛ̀\nNǔ ɖé wá àxì\nMɛ̀ wá xwé bɔ̀ yì àxì\n";

#[test]
fn train_w2v_reports_and_is_deterministic() {
    let ws = Workspace::new();
    let corpus = ws.file("corpus.txt", CORPUS);
    let (a, b) = (ws.path("a.vec"), ws.path("b.vec"));
    let args = |out: &str| {
        embedkit(&[
            "train-w2v",
            &corpus,
            "--out",
            out,
            "--size",
            "8",
            "--epochs",
            "5",
            "--min-count",
            "1",
            "--workers",
            "1",
        ])
    };
    let first = args(&a);
    assert!(first.status.success(), "{}", stderr(&first));
    let text = stdout(&first);
    assert!(text.contains("vocabulary size: "), "{text}");
    assert!(text.contains("epochs: 5"));
    assert!(text.contains("final average loss: "));
    assert!(text.contains("seed=42"));
    assert!(args(&b).status.success());
    assert_eq!(read(&a), read(&b));
}

#[test]
fn seed_comes_from_the_environment_when_not_given() {
    let ws = Workspace::new();
    let corpus = ws.file("corpus.txt", CORPUS);
    let (env_out, flag_out) = (ws.path("env.vec"), ws.path("flag.vec"));
    let base = ["train-w2v", &corpus, "--size", "4", "--epochs", "2", "--min-count", "1", "--workers", "1", "--out"];
    let via_env = Command::new(env!("CARGO_BIN_EXE_embedkit"))
        .args(base)
        .arg(&env_out)
        .env("EMBEDKIT_SEED", "7")
        .output()
        .unwrap();
    assert!(stdout(&via_env).contains("seed=7"));
    let via_flag = embedkit(&[&base[..], &[flag_out.as_str(), "--seed", "7"]].concat());
    assert!(via_flag.status.success());
    assert_eq!(read(&env_out), read(&flag_out));
}

#[test]
fn empty_corpus_is_a_data_error() {
    let ws = Workspace::new();
    let corpus = ws.file("empty.txt", "\n\n");
    let out = embedkit(&["train-w2v", &corpus, "--out", &ws.path("m.vec")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("empty vocabulary"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_two() {
    let ws = Workspace::new();
    let cfg = ws.file("bad.cfg", "colour=blue\n");
    for args in [
        vec!["train-poincare", "r.tsv", "--out", "m.txt", "--dim", "0"],
        vec!["neighbors", "m.vec", "--positives", "a", "--topn", "0"],
        vec!["train-w2v", "c.txt", "--out", "m.vec", "--config", &cfg],
        vec!["train-w2v", "c.txt", "--out", "m.vec", "--no-such-flag"],
        vec!["train-glove", "c.txt", "--out", "m.vec", "--weight-alpha", "1.5"],
    ] {
        assert_eq!(embedkit(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn glove_training_is_deterministic() {
    let ws = Workspace::new();
    let corpus = ws.file("corpus.txt", CORPUS);
    let (a, b) = (ws.path("a.vec"), ws.path("b.vec"));
    for out in [&a, &b] {
        let o = embedkit(&["train-glove", &corpus, "--out", out, "--dim", "4", "--epochs", "10"]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("loss: "));
    }
    assert_eq!(read(&a), read(&b));
}

const RELATIONS: &str = "kɔ̀fí\tboy_name\nsɛ́ná\tboy_name\nàblá\tgirl_name\nyàwá\tgirl_name\n";

#[test]
fn train_poincare_then_eval_and_plot() {
    let ws = Workspace::new();
    let rel = ws.file("rel.tsv", RELATIONS);
    let (a, b) = (ws.path("a.txt"), ws.path("b.txt"));
    for out in [&a, &b] {
        let o = embedkit(&["train-poincare", &rel, "--out", out, "--epochs", "50", "--curvature", "10"]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("Reconstruction "));
    }
    assert_eq!(read(&a), read(&b));

    let o = embedkit(&["eval", &a]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);

    let svg = ws.path("plot.svg");
    let o = embedkit(&["plot", &a, "--out", &svg, "--kind", "hierarchy"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let lines = doc.descendants().filter(|n| n.has_tag_name("line")).count();
    assert_eq!(lines, 4);
}

#[test]
fn default_epochs_is_two_thousand() {
    let ws = Workspace::new();
    let rel = ws.file("rel.tsv", "a\tb\n");
    let o = embedkit(&["train-poincare", &rel, "--out", &ws.path("m.txt")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("epochs: 2000"));
}

#[test]
fn malformed_relations_name_the_line() {
    let ws = Workspace::new();
    let rel = ws.file("rel.tsv", "a\tb\nlonely\n");
    let o = embedkit(&["train-poincare", &rel, "--out", &ws.path("m.txt")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

/// Hand-placed model: children sit next to their parents.
const PERFECT: &str =
    "curvature=1\neps=0.00001\nrelations=2\n4 2\na 0.5 0\np 0.45 0\nb -0.5 0\nq -0.45 0\na\tp\nb\tq\n";

#[test]
fn eval_perfect_fixture() {
    let ws = Workspace::new();
    let model = ws.file("m.txt", PERFECT);
    let o = embedkit(&["eval", &model]);
    assert_eq!(stdout(&o), "Reconstruction 1.00/1.00\n");

    // q is b's training parent and leaves the pool, so p is b's nearest candidate
    let test = ws.file("test.tsv", "b\tp\n");
    let o = embedkit(&["eval", &model, "--test", &test]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "Reconstruction 1.00/1.00\nLink prediction 1.00/1.00\n");

    let o = embedkit(&["eval", &ws.path("missing.txt")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn neighbors_scores_and_suggestions() {
    let ws = Workspace::new();
    let model = ws.file("m.vec", "3 2\nx 0.3 -0.2\nnɔví 1 0.5\ny 0.3 -0.2\n");
    let o = embedkit(&["neighbors", &model, "--positives", "x", "--topn", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "y 1.00000\n");

    let o = embedkit(&["neighbors", &model, "--positives", "novi"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nɔví"), "{}", stderr(&o));
}

#[test]
fn predict_with_golds_and_foreign_names() {
    let ws = Workspace::new();
    let model = ws.file(
        "m.txt",
        "curvature=1\neps=0.00001\nrelations=2\n4 2\nkofi 0.5 0\nboy_name 0.45 0\nabla -0.5 0\ngirl_name -0.45 0\nkofi\tboy_name\nabla\tgirl_name\n",
    );
    let names = ws.file("names.txt", "kofi\nabla\n");
    let golds = ws.file("golds.txt", "boy_name\ngirl_name\n");
    let json = ws.path("report.json");
    let o = embedkit(&[
        "predict",
        &model,
        "--names",
        &names,
        "--types",
        "boy_name,girl_name",
        "--golds",
        &golds,
        "--report-json",
        &json,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("kofi\tboy_name\nabla\tgirl_name\nfallback: 0 of 2"), "{text}");
    let accuracy = text.lines().find(|l| l.starts_with("accuracy")).unwrap();
    assert!(accuracy.split_whitespace().any(|f| f == "100"), "{accuracy}");
    let report: serde_json::Value = serde_json::from_slice(&read(&json)).unwrap();
    assert_eq!(report["accuracy"], 1.0);

    let foreign = ws.file("foreign.txt", "Hassan\nUmar\nNabra\n");
    let o = embedkit(&["predict", &model, "--names", &foreign, "--types", "boy_name,girl_name"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("fallback: 3 of 3"));
}

#[test]
fn plot_element_counts_and_dimension_guard() {
    let ws = Workspace::new();
    let one = ws.file("one.vec", "1 2\ntɔ 0.5 -1\n");
    let svg = ws.path("one.svg");
    let o = embedkit(&["plot", &one, "--out", &svg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let count = |tag| doc.descendants().filter(|n| n.has_tag_name(tag)).count();
    assert_eq!((count("circle"), count("text")), (1, 1));

    let chain =
        ws.file("chain.txt", "curvature=1\neps=0.00001\nrelations=2\n3 2\na 0.5 0\nb 0.2 0\nc 0 0\na\tb\nb\tc\n");
    let svg = ws.path("chain.svg");
    assert!(embedkit(&["plot", &chain, "--out", &svg, "--kind", "hierarchy"]).status.success());
    let text = fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let count = |tag| doc.descendants().filter(|n| n.has_tag_name(tag)).count();
    assert_eq!((count("circle"), count("line")), (4, 2));

    let five = ws.file("five.vec", "1 5\nw 1 2 3 4 5\n");
    let o = embedkit(&["plot", &five, "--out", &ws.path("five.svg")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dimension"), "{}", stderr(&o));
}
