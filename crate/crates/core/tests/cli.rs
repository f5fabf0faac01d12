//! End-to-end runs of the `walspred` binary on small hand-made files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use walspred::{parse_dataset, read_predictions, Pipeline, PipelineOptions, Role, System};

const SOV: &str = "81A Order of Subject, Object and Verb";
const ADJ: &str = "87A Order of Adjective and Noun";
const HEADER: &str = "wals_code\tname\tlatitude\tlongitude\tgenus\tfamily\tcountrycodes\tfeatures\n";

fn row(code: &str, lat: f64, lon: f64, genus: &str, sov: &str, adj: &str) -> String {
    format!("{code}\t{code} language\t{lat}\t{lon}\t{genus}\tFam {genus}\tFR\t{SOV}={sov}|{ADJ}={adj}\n")
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

/// Three training languages and five dev languages. In the masked dev file
/// `d1`, `d3` and `d5` hide word order, `d2` and `d4` hide adjective order.
fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let train = [
        row("t1", 10.0, 10.0, "A", "1 SOV", "1 Adjective-Noun"),
        row("t2", 12.0, 11.0, "A", "1 SOV", "2 Noun-Adjective"),
        row("t3", -20.0, 100.0, "B", "2 SVO", "2 Noun-Adjective"),
    ]
    .concat();
    let gold = [
        row("d1", 11.0, 12.0, "A", "1 SOV", "2 Noun-Adjective"),
        row("d2", -21.0, 101.0, "B", "2 SVO", "2 Noun-Adjective"),
        row("d3", 9.0, 9.0, "A", "1 SOV", "1 Adjective-Noun"),
        row("d4", -19.0, 99.0, "B", "2 SVO", "1 Adjective-Noun"),
        row("d5", 40.0, -60.0, "C", "3 VSO", "2 Noun-Adjective"),
    ]
    .concat();
    let masked = [
        row("d1", 11.0, 12.0, "A", "?", "2 Noun-Adjective"),
        row("d2", -21.0, 101.0, "B", "2 SVO", "?"),
        row("d3", 9.0, 9.0, "A", "?", "1 Adjective-Noun"),
        row("d4", -19.0, 99.0, "B", "2 SVO", "?"),
        row("d5", 40.0, -60.0, "C", "?", "2 Noun-Adjective"),
    ]
    .concat();
    fs::write(root.join("train.tsv"), format!("{HEADER}{train}")).unwrap();
    fs::write(root.join("dev-gold.tsv"), format!("{HEADER}{gold}")).unwrap();
    fs::write(root.join("dev-masked.tsv"), format!("{HEADER}{masked}")).unwrap();
    Fixture { _dir: dir, root }
}

fn walspred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walspred")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = walspred(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL_NET: [&str; 8] = ["--clusters", "2", "--dim", "8", "--epochs", "5", "--lr", "0.01"];

fn predict(f: &Fixture, system: &str, out: &str, extra: &[&str]) -> PathBuf {
    let out = f.path(out);
    let (train, target) = (f.path("train.tsv"), f.path("dev-masked.tsv"));
    let mut args = vec!["predict", "--system", system, "--train", s(&train), "--target", s(&target), "--out", s(&out)];
    args.extend_from_slice(&SMALL_NET);
    args.extend_from_slice(extra);
    ok(&args);
    out
}

#[test]
fn baseline_accuracy_matches_hand_scoring() {
    let f = fixture();
    // Merged pool: word order SOV 2 / SVO 3, adjective order N-A 4 / A-N 2.
    // Predictions SVO, SVO, SVO for d1, d3, d5 (all wrong) and N-A for d2
    // (right) and d4 (wrong): 1 of 5.
    let preds = predict(&f, "baseline", "base.tsv", &[]);
    let report = ok(&[
        "evaluate",
        "--gold",
        s(&f.path("dev-gold.tsv")),
        "--masked",
        s(&f.path("dev-masked.tsv")),
        "--pred",
        s(&preds),
        "--json",
        s(&f.path("report.json")),
    ]);
    assert!(report.starts_with("accuracy 0.2000  (1 / 5 masked cells"), "{report}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(f.path("report.json")).unwrap()).unwrap();
    assert_eq!(json["overall"], 0.2);
    assert_eq!(json["correct"], 1);

    // Training only: SOV 2 / SVO 1 and N-A 2 / A-N 1, so d1, d3 and d2 are
    // right: 3 of 5.
    let preds = predict(&f, "baseline", "base-nomerge.tsv", &["--no-merge"]);
    let report = ok(&["evaluate", "--gold", s(&f.path("dev-gold.tsv")), "--pred", s(&preds)]);
    assert!(report.starts_with("accuracy 0.6000  (3 / 5 masked cells"), "{report}");
}

#[test]
fn every_system_predicts_every_masked_cell() {
    let f = fixture();
    for system in ["baseline", "prob", "neural", "knn-hamming", "knn-embed", "combined"] {
        let out = predict(&f, system, &format!("{system}.tsv"), &["--k", "3"]);
        let preds = read_predictions(&out).unwrap();
        assert_eq!(preds.len(), 5, "{system}");
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("wals_code\tfeature\tvalue\tconfidence\tsystem\n"));
    }
    let out = walspred(&[
        "predict",
        "--system",
        "neural",
        "--no-merge",
        "--train",
        s(&f.path("train.tsv")),
        "--target",
        s(&f.path("dev-masked.tsv")),
        "--out",
        s(&f.path("x.tsv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cli_output_equals_library_output() {
    let f = fixture();
    let out = predict(&f, "prob", "prob.tsv", &["--variant", "score1"]);
    let train = parse_dataset(f.path("train.tsv"), Role::Train).unwrap();
    let target = parse_dataset(f.path("dev-masked.tsv"), Role::Test).unwrap();
    let opts = PipelineOptions {
        variant: walspred::ScoreVariant::Score1,
        ..Default::default()
    };
    let lib = Pipeline::new(&train, &target, opts).unwrap().run(System::Probabilistic).unwrap();
    assert_eq!(fs::read_to_string(out).unwrap(), walspred::prediction::predictions_to_tsv(&lib));
}

#[test]
fn commands_are_deterministic() {
    let f = fixture();
    let gold = f.path("dev-gold.tsv");
    let train = f.path("train.tsv");
    let run_twice = |args: &dyn Fn(&str) -> Vec<String>, file: &str| {
        let a = f.path(&format!("a-{file}"));
        let b = f.path(&format!("b-{file}"));
        for p in [&a, &b] {
            let v = args(s(p));
            ok(&v.iter().map(String::as_str).collect::<Vec<_>>());
        }
        let (x, y) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
        assert!(!x.is_empty());
        assert_eq!(x, y, "{file} differs between runs");
    };

    run_twice(
        &|out| ["mask", "--in", s(&gold), "--rate", "0.5", "--seed", "7", "--out", out].map(String::from).to_vec(),
        "mask.tsv",
    );
    run_twice(
        &|out| ["fit-prob", "--train", s(&train), "--target", s(&f.path("dev-masked.tsv")), "--out", out].map(String::from).to_vec(),
        "prob.json",
    );
    run_twice(
        &|out| {
            let mut v: Vec<String> = ["train-neural", "--train", s(&train), "--seed", "3", "--dropout", "0.5", "--out", out]
                .map(String::from)
                .to_vec();
            v.extend(SMALL_NET.map(String::from));
            v
        },
        "neural.json",
    );
    for system in ["combined", "knn-embed"] {
        let a = fs::read(predict(&f, system, &format!("a-{system}.tsv"), &["--seed", "5"])).unwrap();
        let b = fs::read(predict(&f, system, &format!("b-{system}.tsv"), &["--seed", "5"])).unwrap();
        assert_eq!(a, b, "{system}");
    }
}

#[test]
fn saved_models_feed_predict_and_export() {
    let f = fixture();
    let train = f.path("train.tsv");
    let masked = f.path("dev-masked.tsv");
    let model = f.path("neural.json");
    let mut args = vec!["train-neural", "--train", s(&train), "--target", s(&masked), "--out", s(&model)];
    args.extend_from_slice(&SMALL_NET);
    ok(&args);
    let prob = f.path("prob.json");
    ok(&["fit-prob", "--train", s(&train), "--target", s(&masked), "--out", s(&prob)]);

    let from_saved = predict(&f, "combined", "saved.tsv", &["--neural-model", s(&model), "--prob-model", s(&prob)]);
    let fresh = predict(&f, "combined", "fresh.tsv", &[]);
    assert_eq!(fs::read(from_saved).unwrap(), fs::read(fresh).unwrap());

    let emb = f.path("emb.csv");
    ok(&["export-embeddings", "--model", s(&model), "--out", s(&emb)]);
    let text = fs::read_to_string(&emb).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "wals_code,family,e0,e1,e2,e3,e4,e5,e6,e7");
    assert_eq!(lines.count(), 8);
}

#[test]
fn disagreement_and_grid_search_run() {
    let f = fixture();
    let prob = predict(&f, "prob", "prob.tsv", &[]);
    let neural = predict(&f, "neural", "neural.tsv", &[]);
    let text = ok(&[
        "analyze-disagreement",
        "--gold",
        s(&f.path("dev-gold.tsv")),
        "--masked",
        s(&f.path("dev-masked.tsv")),
        "--prob",
        s(&prob),
        "--neural",
        s(&neural),
    ]);
    assert!(text.starts_with("masked cells"), "{text}");

    let out = f.path("grid.json");
    let text = ok(&[
        "grid-search",
        "--train",
        s(&f.path("train.tsv")),
        "--dev-gold",
        s(&f.path("dev-gold.tsv")),
        "--dev-masked",
        s(&f.path("dev-masked.tsv")),
        "--clusters",
        "1,10",
        "--dims",
        "128",
        "--dropouts",
        "0,0.5",
        "--epochs",
        "2",
        "--jobs",
        "2",
        "--out",
        s(&out),
    ]);
    assert!(text.starts_with("best: clusters 1 "), "{text}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    // 10 clusters cannot be fitted on 8 coordinates.
    assert_eq!(json["table"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes() {
    assert_eq!(walspred(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(walspred(&["predict", "--system", "baseline"]).status.code(), Some(2));
    assert_eq!(walspred(&["mask", "--in", "/nonexistent/x.tsv", "--out", "/tmp/y.tsv"]).status.code(), Some(1));
    let f = fixture();
    let out = walspred(&[
        "predict",
        "--system",
        "combined",
        "--tn",
        "2",
        "--train",
        s(&f.path("train.tsv")),
        "--target",
        s(&f.path("dev-masked.tsv")),
        "--out",
        s(&f.path("p.tsv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(walspred(&["--help"]).status.code(), Some(0));
}
