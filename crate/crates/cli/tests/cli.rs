use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use compsense_core::{save_index, ApmiConfig, ApmiIndex, ContextKey};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compsense"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_single_line_error(out: &Output, code: i32) {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", stderr(out));
    let err = stderr(out);
    assert_eq!(err.trim_end().lines().count(), 1, "stderr: {err:?}");
    assert!(err.starts_with("error:"), "stderr: {err:?}");
}

fn toy_index(dir: &Path) -> PathBuf {
    let words = ["running", "swim", "hard", "painting", "tree", "smiling"];
    let m_vc = vec![
        vec![2.0, 3.0, 0.0, 3.0, 4.5, 0.0],
        vec![2.0, 0.0, 3.0, 0.0, 0.0, 5.0],
        vec![2.0, 3.0, 0.0, 3.0, 0.0, 4.0],
        vec![0.0, 0.0, 3.0, 0.0, 0.0, 0.0],
    ];
    let m_cv: Vec<Vec<f64>> = (0..6)
        .map(|w| m_vc.iter().map(|r| r[w]).collect())
        .collect();
    let contexts = ["noun", "adjective", "verb", "adverb"]
        .iter()
        .map(|p| ContextKey::dependency("pos", *p, "X"))
        .collect();
    let index =
        ApmiIndex::from_dense(&words, contexts, &m_vc, &m_cv, ApmiConfig::default()).unwrap();
    let path = dir.join("toy.cbix");
    save_index(&index, std::fs::File::create(&path).unwrap()).unwrap();
    path
}

fn build(dir: &Path, corpus: &str, vocab: &str, extra: &[&str]) -> (PathBuf, Output) {
    let index = dir.join(format!("{corpus}.cbix"));
    let corpus = fixture(corpus);
    let vocab = fixture(vocab);
    let mut args = vec![
        "build",
        "--vocab",
        &vocab,
        "--index",
        index.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    args.push(&corpus);
    let out = run(&args);
    (index, out)
}

#[test]
fn expand_lists_best_completion_first() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    let out = run(&[
        "expand",
        "--index",
        index.to_str().unwrap(),
        "--rho",
        "1",
        "running",
        "swim",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let first: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(first, ["painting", "30.0"]);
    assert!(!text
        .lines()
        .any(|l| l.starts_with("swim") || l.starts_with("running")));
}

#[test]
fn expand_formats_and_top() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    let index = index.to_str().unwrap();
    let out = run(&[
        "expand", "--index", index, "--rho", "3", "--format", "csv", "--top", "2", "running",
        "swim",
    ]);
    assert_eq!(stdout(&out), "word,score\npainting,30.0\ntree,22.5\n");

    let out = run(&["expand", "--index", index, "--format", "json", "hard"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // "hard" only shares the adjective and adverb contexts.
    let words: Vec<&str> = json
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["word"].as_str().unwrap())
        .collect();
    assert_eq!(words, ["smiling", "running"]);
}

#[test]
fn expand_with_no_shared_contexts_lists_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("isolated.cbix");
    let m_vc = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let isolated = ApmiIndex::from_dense(
        &["alpha", "beta"],
        vec![ContextKey::ngram(["a", "b"]), ContextKey::ngram(["c", "d"])],
        &m_vc,
        &m_vc,
        ApmiConfig::default(),
    )
    .unwrap();
    save_index(&isolated, std::fs::File::create(&path).unwrap()).unwrap();
    let out = run(&["expand", "--index", path.to_str().unwrap(), "alpha"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "");
}

#[test]
fn unknown_word_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    let out = run(&["expand", "--index", index.to_str().unwrap(), "unicorn"]);
    assert_single_line_error(&out, 2);
    assert!(stderr(&out).contains("unicorn"));
}

#[test]
fn bad_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    let index = index.to_str().unwrap();
    assert_single_line_error(&run(&["expand", "--bogus"]), 2);
    assert_single_line_error(&run(&["expand", "--index", index, "--rho", "0", "swim"]), 2);
    assert_single_line_error(
        &run(&["expand", "--index", index, "--rho", "abc", "swim"]),
        2,
    );
    assert_single_line_error(
        &run(&[
            "build",
            "--vocab",
            "v",
            "--index",
            "i",
            "--estimator",
            "mle",
            "c",
        ]),
        2,
    );
    assert_single_line_error(
        &run(&["build", "--vocab", "v", "--index", "i", "--log", "3", "c"]),
        2,
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_or_corrupt_files_are_operational_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.cbix");
    assert_single_line_error(
        &run(&["expand", "--index", missing.to_str().unwrap(), "swim"]),
        1,
    );

    let corrupt = dir.path().join("corrupt.cbix");
    std::fs::write(&corrupt, b"CBIX\x01\x00\x00\x00garbage").unwrap();
    let out = run(&["expand", "--index", corrupt.to_str().unwrap(), "swim"]);
    assert_single_line_error(&out, 1);
    assert!(stderr(&out).contains("cannot load index"));
}

#[test]
fn build_reports_summary_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (index, out) = build(
        dir.path(),
        "corpus_c.txt",
        "corpus_c.vocab",
        &["--context", "ngram", "--format", "json"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["words"], 3);
    assert_eq!(json["contexts"], 3);
    assert_eq!(json["sentences"], 8);
    let first = std::fs::read(&index).unwrap();

    for threads in ["1", "3"] {
        let (again, out) = build(
            dir.path(),
            "corpus_c.txt",
            "corpus_c.vocab",
            &["--context", "ngram", "--threads", threads],
        );
        assert!(out.status.success());
        assert_eq!(std::fs::read(again).unwrap(), first);
    }
}

#[test]
fn build_rejects_empty_vocabulary() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.vocab");
    std::fs::write(&empty, "\n  \n").unwrap();
    let index = dir.path().join("out.cbix");
    let out = run(&[
        "build",
        "--context",
        "ngram",
        "--vocab",
        empty.to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
        &fixture("corpus_c.txt"),
    ]);
    assert_single_line_error(&out, 2);
    assert!(stderr(&out).contains("empty vocabulary"));
    assert!(!index.exists());
}

#[test]
fn dependency_contexts_need_conllu() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = build(dir.path(), "corpus_c.txt", "corpus_c.vocab", &[]);
    assert_single_line_error(&out, 2);
}

#[test]
fn build_flags_change_the_index() {
    let dir = tempfile::tempdir().unwrap();
    let read = |extra: &[&str]| {
        let (index, out) = build(dir.path(), "corpus_c.txt", "corpus_c.vocab", extra);
        assert!(out.status.success(), "{}", stderr(&out));
        compsense_core::load_index(std::fs::File::open(index).unwrap()).unwrap()
    };
    let base = read(&["--context", "ngram"]);
    let joint = read(&[
        "--context",
        "ngram",
        "--estimator",
        "joint",
        "--log",
        "2",
        "--k",
        "3",
    ]);
    assert_eq!(joint.config().k, 3.0);
    assert_eq!(joint.config().estimator, compsense_core::Estimator::Joint);
    assert_eq!(joint.config().log_base, compsense_core::LogBase::Base2);
    assert_ne!(base.m_vc(), joint.m_vc());
    let wide = read(&["--context", "ngram", "--window", "2"]);
    assert!(wide.contexts().keys().iter().all(|k| k.parts().len() == 4));
}

#[test]
fn disambiguate_text_output() {
    let dir = tempfile::tempdir().unwrap();
    let (index, _) = build(dir.path(), "hornbill_shared.conllu", "hornbill.vocab", &[]);
    let out = run(&[
        "disambiguate",
        "--index",
        index.to_str().unwrap(),
        "--synonyms",
        &fixture("synonyms.tsv"),
        "Hornbill",
        "bill",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "chosen beak");
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn disambiguate_without_synonyms_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (index, _) = build(dir.path(), "hornbill_shared.conllu", "hornbill.vocab", &[]);
    let out = run(&[
        "disambiguate",
        "--index",
        index.to_str().unwrap(),
        "--synonyms",
        &fixture("synonyms.tsv"),
        "hornbill",
        "beak",
    ]);
    assert_single_line_error(&out, 2);
}

#[test]
fn evaluate_ablation_lowers_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let (index, _) = build(
        dir.path(),
        "hornbill_constituent.conllu",
        "hornbill.vocab",
        &[],
    );
    let index = index.to_str().unwrap();
    let items = fixture("hornbill.jsonl");
    let accuracy = |extra: &[&str]| {
        let mut args = vec![
            "evaluate", "--format", "json", "--index", index, "--items", &items,
        ];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert!(out.status.success(), "{}", stderr(&out));
        let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        json["accuracy"].as_f64().unwrap()
    };
    let full = accuracy(&[]);
    let ablated = accuracy(&["--omit-constituent"]);
    assert_eq!(full, 1.0);
    assert!(ablated < full);
}

#[test]
fn sweep_uses_the_default_grid() {
    let dir = tempfile::tempdir().unwrap();
    let (index, _) = build(dir.path(), "hornbill_shared.conllu", "hornbill.vocab", &[]);
    let out = run(&[
        "sweep",
        "--index",
        index.to_str().unwrap(),
        "--items",
        &fixture("hornbill.jsonl"),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "rho,accuracy\n1.0,1.0\n1.5,1.0\n2.5,1.0\n3.0,1.0\n3.5,1.0\n4.0,1.0\n5.0,1.0\n"
    );
    let out = run(&[
        "sweep",
        "--index",
        index.to_str().unwrap(),
        "--items",
        &fixture("hornbill.jsonl"),
        "--rhos",
        "2,0.5",
    ]);
    assert_eq!(stdout(&out), "rho,accuracy\n2.0,1.0\n0.5,1.0\n");
}

#[test]
fn baseline_picks_the_closer_sense() {
    let tax = fixture("animals.tax");
    let out = run(&["baseline", "--taxonomy", &tax, "dog", "rock", "cat"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "chosen cat 0.6666666666666666\n");

    let out = run(&[
        "baseline",
        "--taxonomy",
        &tax,
        "--items",
        &fixture("animals.jsonl"),
        "--format",
        "json",
    ]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["accuracy"], 1.0);
    assert_eq!(json["method"], "wu-palmer");

    let out = run(&["baseline", "--taxonomy", &tax, "dog", "cat", "unicorn"]);
    assert_single_line_error(&out, 2);
}

#[test]
fn malformed_items_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    let items = dir.path().join("items.jsonl");
    std::fs::write(&items, "{\"compound\": \"running\"}\n").unwrap();
    let out = run(&[
        "evaluate",
        "--index",
        index.to_str().unwrap(),
        "--items",
        items.to_str().unwrap(),
    ]);
    assert_single_line_error(&out, 1);
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));
}
