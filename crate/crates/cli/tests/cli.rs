use std::path::Path;
use std::process::{Command, Output};

fn costsens(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_costsens"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let w = |name: &str, text: &str| std::fs::write(dir.path().join(name), text).unwrap();
    w("scores.csv", "0.9,0.1\n0.2,0.8\n0.6,0.4\n0.3,0.7\n0.55,0.45\n0.4,0.6\n");
    w("labels.txt", "0\n1\n0\n1\n1\n0\n");
    w("costs.json", r#"{"costs": [[0, 1], [5, 0]]}"#);
    dir
}

#[test]
fn mauc_prints_value_and_table() {
    let dir = setup();
    let o = costsens(dir.path(), &["mauc", "--scores", "scores.csv", "--labels", "labels.txt"]);
    assert_eq!(o.status.code(), Some(0));
    // 9 positive/negative pairs per direction, 8 ordered correctly in each
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert_eq!(v, 8.0 / 9.0);
    let o = costsens(dir.path(), &["mauc", "--scores", "scores.csv", "--labels", "labels.txt", "--json"]);
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["mauc"].as_f64(), Some(8.0 / 9.0));
    assert_eq!(j["pairwise_auc"].as_array().unwrap().len(), 2);
}

#[test]
fn fit_then_decide() {
    let dir = setup();
    for method in ["raw", "lf", "metaclass", "ga", "platt", "pav"] {
        let model = format!("{method}.json");
        let o = costsens(
            dir.path(),
            &["fit", "--scores", "scores.csv", "--labels", "labels.txt", "--costs", "costs.json", "--method", method, "--out", &model],
        );
        assert_eq!(o.status.code(), Some(0), "{method}: {}", String::from_utf8_lossy(&o.stderr));
        let o = costsens(dir.path(), &["decide", "--scores", "scores.csv", "--costs", "costs.json", "--model", &model]);
        assert_eq!(o.status.code(), Some(0));
        let preds: Vec<usize> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(preds.len(), 6);
        assert!(preds.iter().all(|&p| p < 2));
    }
    let o = costsens(dir.path(), &["decide", "--scores", "scores.csv", "--costs", "costs.json", "--method", "raw", "--out", "pred.txt"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dir.path().join("pred.txt")).unwrap(), "0\n1\n0\n1\n0\n1\n");
}

#[test]
fn ga_fit_is_seeded() {
    let dir = setup();
    let run = |seed: &str| {
        let o = costsens(
            dir.path(),
            &["fit", "--scores", "scores.csv", "--labels", "labels.txt", "--costs", "costs.json", "--method", "ga", "--seed", seed],
        );
        stdout(&o)
    };
    assert_eq!(run("3"), run("3"));
    std::fs::write(dir.path().join("ga.json"), r#"{"population": 10, "generations": 5}"#).unwrap();
    let o = costsens(
        dir.path(),
        &["fit", "--scores", "scores.csv", "--labels", "labels.txt", "--costs", "costs.json", "--method", "ga", "--ga-config", "ga.json"],
    );
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(dir.path().join("bad.json"), r#"{"population": 10, "colour": 5}"#).unwrap();
    let o = costsens(
        dir.path(),
        &["fit", "--scores", "scores.csv", "--labels", "labels.txt", "--costs", "costs.json", "--method", "ga", "--ga-config", "bad.json"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn costgen_from_priors_and_labels() {
    let dir = setup();
    let o = costsens(dir.path(), &["costgen", "--priors", "3,1", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["seed"], 4);
    assert_eq!(j["scale"], 2000.0);
    assert_eq!(j["priors"], serde_json::json!([0.75, 0.25]));
    let c = j["costs"].as_array().unwrap();
    assert_eq!(c[0][0], 0.0);
    assert!(c[0][1].as_f64().unwrap() <= 2000.0 * 3.0);
    assert!(c[1][0].as_f64().unwrap() <= 2000.0 / 3.0);
    assert_eq!(stdout(&o), stdout(&costsens(dir.path(), &["costgen", "--priors", "0.75,0.25", "--seed", "4"])));

    let o = costsens(dir.path(), &["costgen", "--labels", "labels.txt", "--seed", "1", "--scale", "10", "--out", "c.json"]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(j["priors"], serde_json::json!([0.5, 0.5]));
}

#[test]
fn stats_text_and_json() {
    let dir = setup();
    std::fs::write(dir.path().join("r.csv"), "dataset,a,b,c\nd1,1,2,3\nd2,1,3,2\nd3,1,2,3\nd4,2,1,3\n").unwrap();
    let o = costsens(dir.path(), &["stats", "--results", "r.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("Friedman Test") && text.contains("Holm Test"), "{text}");
    let o = costsens(dir.path(), &["stats", "--results", "r.csv", "--direction", "higher", "--format", "json"]);
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ranks: Vec<f64> = j["friedman"]["avg_ranks"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(ranks, vec![2.75, 2.0, 1.25]);
}

#[test]
fn experiment_writes_requested_formats() {
    let dir = setup();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"seed": 3, "runs": 1, "folds": 2, "methods": ["raw", "pav"],
            "datasets": [{"kind": "scores", "scores": "scores.csv", "labels": "labels.txt"}]}"#,
    )
    .unwrap();
    let o = costsens(dir.path(), &["experiment", "--config", "cfg.json", "--out", "out", "--format", "csv", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.json", "cells.csv", "costs.csv"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    assert!(!dir.path().join("out/report.txt").exists());
    let j: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(j["config"]["seed"], 3);
    let o = costsens(dir.path(), &["experiment", "--config", "cfg.json", "--out", "out2", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out2/report.json")).unwrap()).unwrap();
    assert_eq!(j["config"]["seed"], 9);
}

#[test]
fn exit_codes() {
    let dir = setup();
    assert_eq!(costsens(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(costsens(dir.path(), &["--version"]).status.code(), Some(0));
    assert_eq!(costsens(dir.path(), &[]).status.code(), Some(1));
    assert_eq!(costsens(dir.path(), &["mauc", "--scores", "scores.csv"]).status.code(), Some(1));
    assert_eq!(costsens(dir.path(), &["fit", "--method", "magic"]).status.code(), Some(1));
    // method/model disagreement and a missing model are usage errors
    let o = costsens(dir.path(), &["decide", "--scores", "scores.csv", "--costs", "costs.json", "--method", "lf"]);
    assert_eq!(o.status.code(), Some(1));
    costsens(dir.path(), &["fit", "--scores", "scores.csv", "--labels", "labels.txt", "--costs", "costs.json", "--method", "pav", "--out", "m.json"]);
    let o = costsens(dir.path(), &["decide", "--scores", "scores.csv", "--costs", "costs.json", "--model", "m.json", "--method", "platt"]);
    assert_eq!(o.status.code(), Some(1));
    // data problems
    assert_eq!(costsens(dir.path(), &["mauc", "--scores", "missing.csv", "--labels", "labels.txt"]).status.code(), Some(2));
    std::fs::write(dir.path().join("short.txt"), "0\n1\n").unwrap();
    assert_eq!(costsens(dir.path(), &["mauc", "--scores", "scores.csv", "--labels", "short.txt"]).status.code(), Some(2));
    std::fs::write(dir.path().join("c3.json"), r#"{"costs": [[0,1,1],[1,0,1],[1,1,0]]}"#).unwrap();
    let o = costsens(dir.path(), &["decide", "--scores", "scores.csv", "--costs", "c3.json", "--model", "m.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
