use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_linked-eda");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_fixture(dir: &Path, steps: &str) -> PathBuf {
    let mut csv = String::from("x,y,z,group\n");
    for i in 0..40 {
        let t = i as f64;
        let shift = if i % 2 == 0 { 0.0 } else { 8.0 };
        csv.push_str(&format!(
            "{},{},{},{}\n",
            shift + (t * 0.7).sin(),
            shift + (t * 1.3).cos(),
            t * 0.1,
            if i % 2 == 0 { "a" } else { "b" }
        ));
    }
    fs::write(dir.join("data.csv"), csv).unwrap();
    let config = dir.join("config.json");
    fs::write(
        &config,
        format!(r#"{{"dataset": "data.csv", "seed": 7, "steps": {steps}}}"#),
    )
    .unwrap();
    config
}

const STEPS: &str = r#"[
    {"step": "filter", "filter": "z >= 0.5"},
    {"step": "cluster", "algorithm": "kmeans", "k": 2},
    {"step": "project", "algorithm": "pca", "dims": 2},
    {"step": "significance", "method": "anova"},
    {"step": "rank", "method": "anova"}
]"#;

fn analyze(config: &Path, out: &Path) -> Output {
    run(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn json(path: PathBuf) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn analyze_writes_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_fixture(dir.path(), STEPS);
    let (out1, out2) = (dir.path().join("a"), dir.path().join("b"));
    let first = analyze(&config, &out1);
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    assert!(analyze(&config, &out2).status.success());
    assert_eq!(files(&out1), files(&out2));

    let names: Vec<String> = files(&out1).into_iter().map(|(n, _)| n).collect();
    for expected in [
        "dataset.json",
        "step_00_filter.json",
        "step_01_cluster.json",
        "summary.json",
        "snapshot.json",
        "events.json",
    ] {
        assert!(
            names.iter().any(|n| n == expected),
            "missing {expected} in {names:?}"
        );
    }
    let clusters = json(out1.join("step_01_cluster.json"));
    assert_eq!(clusters["labels"][0], 0);
}

#[test]
fn empty_steps_write_dataset_only() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_fixture(dir.path(), "[]");
    let out = dir.path().join("out");
    assert!(analyze(&config, &out).status.success());
    let names: Vec<String> = files(&out).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, vec!["dataset.json".to_string()]);
    assert_eq!(json(out.join("dataset.json"))["n_rows"], 40);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_fixture(
        dir.path(),
        r#"[{"step": "significance", "method": "anova"}]"#,
    );
    let out = dir.path().join("out");
    assert_eq!(analyze(&bad, &out).status.code(), Some(2));
    assert!(!out.join("dataset.json").exists());

    let missing = dir.path().join("nope.json");
    assert_eq!(analyze(&missing, &out).status.code(), Some(1));

    let busy = std::net::TcpListener::bind("0.0.0.0:0").unwrap();
    let port = busy.local_addr().unwrap().port().to_string();
    assert_eq!(run(&["serve", "--port", &port]).status.code(), Some(3));
}

#[test]
fn replay_matches_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_fixture(dir.path(), STEPS);
    let analyzed = dir.path().join("analyzed");
    assert!(analyze(&config, &analyzed).status.success());
    let replayed = dir.path().join("replayed");
    let log = analyzed.join("events.json");
    let r = run(&[
        "replay",
        "--log",
        log.to_str().unwrap(),
        "--out",
        replayed.to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(
        json(analyzed.join("snapshot.json")),
        json(replayed.join("snapshot.json"))
    );
    assert_eq!(
        json(analyzed.join("summary.json")),
        json(replayed.join("summary.json"))
    );
}
