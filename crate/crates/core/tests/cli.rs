use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_blockvote"));
    cmd.env_remove("BLOCKVOTE_WORKERS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn generated(dir: &Path, extra: &[&str]) -> (PathBuf, PathBuf, Value) {
    let mut args = vec!["generate", "--out-dir", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let summary = json(&run(&args));
    (dir.join("edges.tsv"), dir.join("labels.txt"), summary)
}

fn line_count(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn generate_default_writes_consistent_files() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, labels, summary) = generated(dir.path(), &["--seed", "3"]);
    assert_eq!(line_count(&edges), summary["edges"].as_u64().unwrap() as usize);
    assert_eq!(line_count(&labels), summary["fraud_users"].as_u64().unwrap() as usize);
    assert_eq!(summary["fraud_users"], 150);
    assert!(dir.path().join("blocks.tsv").exists());
    let conf = std::fs::read_to_string(dir.path().join("generate.conf")).unwrap();
    assert!(conf.contains("seed=3"));
}

#[test]
fn generate_from_echoed_config_is_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    generated(a.path(), &["--seed", "11", "--users", "600", "--merchants", "200"]);
    let conf = a.path().join("generate.conf");
    generated(b.path(), &["--config", conf.to_str().unwrap()]);
    let read = |d: &Path| std::fs::read(d.join("edges.tsv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn generate_block_spec() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, summary) = generated(dir.path(), &["--blocks", "3x50x20x0.8"]);
    assert_eq!(summary["config"]["blocks"].as_array().unwrap().len(), 3);

    let out = run(&["generate", "--out-dir", dir.path().to_str().unwrap(), "--blocks", "3x50x20"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["generate", "--out-dir", dir.path().to_str().unwrap(), "--users", "10", "--blocks", "1x50x20x0.8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn detect_echoes_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _, _) = generated(dir.path(), &[]);
    let out = json(&run(&[
        "detect", "--edges", edges.to_str().unwrap(), "--sampler", "res", "--ratio", "0.1", "--num-samples", "80",
        "--threshold", "8", "--seed", "7", "--workers", "1",
    ]));
    let params = &out["manifest"]["params"];
    assert_eq!(params["sampler"]["method"], "res");
    assert_eq!(params["sampler"]["ratio"], 0.1);
    assert_eq!(params["num_samples"], 80);
    assert_eq!(params["threshold"], 8);
    assert_eq!(params["seed"], 7);
    assert_eq!(params["c"], 5.0);
    assert_eq!(params["k_max"], 30);
    assert_eq!(out["manifest"]["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    let hist = out["vote_histogram"]["users"].as_array().unwrap();
    assert_eq!(hist.len(), 81);
    let detected = out["detected_users"].as_array().unwrap();
    let at_least_t: u64 = hist[8..].iter().map(|h| h.as_u64().unwrap()).sum();
    assert_eq!(detected.len() as u64, at_least_t);
    assert!(detected.iter().all(|u| u.as_str().unwrap().starts_with('u')));
}

#[test]
fn detect_merchant_side_bagging() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _, _) = generated(dir.path(), &[]);
    let out = json(&run(&[
        "detect", "--edges", edges.to_str().unwrap(), "--sampler", "ons", "--side", "merchant", "--ratio", "0.2",
        "--num-samples", "20", "--workers", "1",
    ]));
    assert_eq!(out["manifest"]["params"]["sampler"]["method"], "ons");
    assert_eq!(out["manifest"]["params"]["sampler"]["side"], "merchant");
    assert_eq!(out["manifest"]["params"]["threshold"], 2);
    assert!(!out["detected_merchants"].as_array().unwrap().is_empty());
}

#[test]
fn detect_is_reproducible_from_its_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _, _) = generated(dir.path(), &["--seed", "5"]);
    let edges = edges.to_str().unwrap();
    let first = json(&run(&[
        "detect", "--edges", edges, "--sampler", "tns", "--ratio", "0.5", "--ratio-v", "0.6", "--num-samples", "12",
        "--seed", "99", "--workers", "2",
    ]));
    let p = &first["manifest"]["params"];
    let conf = dir.path().join("replay.conf");
    std::fs::write(
        &conf,
        format!(
            "sampler=tns\nratio={}\nratio_v={}\nnum_samples={}\nthreshold={}\nc={}\nkmax={}\nno_truncate={}\nseed={}\n",
            p["sampler"]["ratio_u"],
            p["sampler"]["ratio_v"],
            p["num_samples"],
            p["threshold"],
            p["c"],
            p["k_max"],
            !p["truncate"].as_bool().unwrap(),
            p["seed"]
        ),
    )
    .unwrap();
    let second = json(&bin().args(["detect", "--edges", edges, "--config", conf.to_str().unwrap()]).env("BLOCKVOTE_WORKERS", "3").output().unwrap());
    assert_eq!(second["manifest"]["runtime"]["workers"], 3);
    assert_eq!(first["detected_users"], second["detected_users"]);
    assert_eq!(first["detected_merchants"], second["detected_merchants"]);
    assert_eq!(first["vote_histogram"], second["vote_histogram"]);
    assert_eq!(first["manifest"]["params"], second["manifest"]["params"]);
}

#[test]
fn detect_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _, _) = generated(dir.path(), &[]);
    let target = dir.path().join("result.json");
    let out = run(&[
        "detect", "--edges", edges.to_str().unwrap(), "--num-samples", "5", "--workers", "1", "--output",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(target).unwrap()).unwrap();
    assert!(v["detected_users"].is_array());
}

#[test]
fn exit_codes() {
    let out = run(&["detect"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--edges"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "a\tb\nonly-one-field\n").unwrap();
    let out = run(&["detect", "--edges", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let missing = dir.path().join("missing.tsv");
    assert_eq!(run(&["detect", "--edges", missing.to_str().unwrap()]).status.code(), Some(3));

    let good = dir.path().join("good.tsv");
    std::fs::write(&good, "a\tx\nb\tx\n").unwrap();
    let g = good.to_str().unwrap();
    assert_eq!(run(&["detect", "--edges", g, "--ratio", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["detect", "--edges", g, "--num-samples", "4", "--threshold", "5"]).status.code(), Some(2));
    assert_eq!(run(&["detect", "--edges", g, "--c", "1.0"]).status.code(), Some(2));
    assert_eq!(run(&["detect", "--edges", g, "--sampler", "xyz"]).status.code(), Some(2));
    assert_eq!(run(&["detect", "--edges", g, "--workers", "1", "--num-samples", "3"]).status.code(), Some(0));
}

#[test]
fn sweep_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, labels, _) = generated(dir.path(), &["--seed", "2"]);
    let out = run(&[
        "sweep", "--edges", edges.to_str().unwrap(), "--labels", labels.to_str().unwrap(), "--num-samples", "40",
        "--workers", "1",
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("T,detected,tp,fp,fn,precision,recall,f1"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 40);
    for w in rows.windows(2) {
        assert!(w[1][1] <= w[0][1] && w[1][6] <= w[0][6]);
    }
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("best F1 "), "{err}");
}

#[test]
fn sweep_with_empty_labels_has_zero_recall() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _, _) = generated(dir.path(), &[]);
    let empty = dir.path().join("none.txt");
    std::fs::write(&empty, "").unwrap();
    let out = run(&[
        "sweep", "--edges", edges.to_str().unwrap(), "--labels", empty.to_str().unwrap(), "--num-samples", "10",
        "--workers", "1",
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(6) == Some("0.000000")));
}

#[test]
fn bench_reports_both_timings_and_is_worker_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _, _) = generated(dir.path(), &[]);
    let e = edges.to_str().unwrap();
    let one = json(&run(&["bench", "--edges", e, "--num-samples", "20", "--workers", "1"]));
    let eight = json(&run(&["bench", "--edges", e, "--num-samples", "20", "--workers", "8"]));
    for v in [&one, &eight] {
        assert!(v["baseline_ms"].as_f64().unwrap() > 0.0);
        assert!(v["ensemble_ms"].as_f64().unwrap() > 0.0);
        assert!(v["ratio"].as_f64().unwrap() > 0.0);
    }
    for key in ["baseline_detected_users", "ensemble_detected_users", "ensemble_detected_merchants"] {
        assert_eq!(one[key], eight[key]);
    }
}

#[test]
fn bench_full_sample_costs_about_the_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _, _) = generated(dir.path(), &["--users", "20000", "--merchants", "3000"]);
    let v = json(&run(&[
        "bench", "--edges", edges.to_str().unwrap(), "--ratio", "1.0", "--num-samples", "1", "--fixed-k", "30",
        "--workers", "1",
    ]));
    let ratio = v["ratio"].as_f64().unwrap();
    assert!((0.25..4.0).contains(&ratio), "ratio {ratio}");
    assert_eq!(v["baseline_detected_users"], v["ensemble_detected_users"]);
}
