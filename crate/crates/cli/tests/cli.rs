use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use genelab::io::load_checkpoint;
use genelab::training::{GanModel, TrainConfig};

fn genelab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genelab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = genelab(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const SMALL: &[&str] = &["--ng", "3", "--nv", "4", "--dg", "2"];

fn train_small(dir: &Path, out: &str, steps: &str) {
    let mut args = vec!["train", "--out", out, "--steps", steps, "--batch", "16"];
    args.extend(SMALL);
    ok(dir, &args);
}

#[test]
fn capacity_prints_exact_and_rounded() {
    let dir = tempfile::tempdir().unwrap();
    let s = ok(dir.path(), &["capacity", "--ng", "64", "--nv", "256"]);
    let mut lines = s.lines();
    let exact = lines.next().unwrap();
    assert_eq!(exact.len(), 155);
    assert!(exact.starts_with("13407807929942597099"));
    assert_eq!(lines.next().unwrap(), "≈1.34e154");
    let s = ok(dir.path(), &["capacity", "--ng", "1", "--nv", "256"]);
    assert_eq!(s.lines().next().unwrap(), "256");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(genelab(d, &["--help"]).status.code(), Some(0));
    assert_eq!(genelab(d, &["--version"]).status.code(), Some(0));
    assert_eq!(genelab(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(genelab(d, &["capacity", "--ng", "2"]).status.code(), Some(1));
    assert_eq!(genelab(d, &["capacity", "--ng", "2", "--nv", "2", "--bogus"]).status.code(), Some(1));
    assert_eq!(genelab(d, &["sample", "--out", "missing"]).status.code(), Some(2));
    assert_eq!(genelab(d, &["capacity", "--ng", "0", "--nv", "2"]).status.code(), Some(2));
    assert_eq!(
        genelab(d, &["train", "--config", "nope.json", "--steps", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(genelab(d, &["cond-sample", "--cond", "x>0=2"]).status.code(), Some(1));
}

#[test]
fn zero_step_train_is_fresh_init() {
    let dir = tempfile::tempdir().unwrap();
    train_small(dir.path(), "o", "0");
    let ck = load_checkpoint(&dir.path().join("o/checkpoint.bin")).unwrap();
    assert_eq!(ck.step, 0);
    let cfg = TrainConfig {
        dims: genelab::GenomeDims { n_g: 3, n_v: 4, d_g: 2 },
        batch_size: 16,
        steps: 0,
        ..TrainConfig::default()
    };
    assert_eq!(ck.config, cfg);
    assert_eq!(ck.model, GanModel::init(&cfg).unwrap());
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let k = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn unconditioned_cond_sample_matches_sample() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    train_small(d, "o", "20");
    ok(d, &["sample", "--out", "o", "--seed", "4", "--n", "50"]);
    ok(d, &["cond-sample", "--out", "o", "--seed", "4", "--n", "50", "--samples", "500"]);
    let a = fs::read_to_string(d.join("o/samples.csv")).unwrap();
    let b = fs::read_to_string(d.join("o/cond_samples.csv")).unwrap();
    assert_eq!(column(&a, "sequence"), column(&b, "sequence"));
    assert_eq!(a, b);
}

#[test]
fn commands_write_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    train_small(d, "o", "30");
    for f in ["checkpoint.bin", "train_log.csv", "train_report.json", "config.json"] {
        assert!(d.join("o").join(f).exists(), "{f}");
    }
    ok(d, &["stats", "--out", "o", "--samples", "400"]);
    let stats = d.join("o/stats.csv");
    let s = ok(
        d,
        &["cond-sample", "--out", "o", "--cond", "x>0=1", "--temp", "0", "--stats", stats.to_str().unwrap()],
    );
    assert!(s.contains("T=0"));
    ok(d, &["gene-scores", "--out", "o", "--samples", "400"]);
    ok(d, &["prune", "--out", "o", "--x", "2", "--samples", "400"]);
    assert_eq!(genelab(d, &["prune", "--out", "o", "--x", "3"]).status.code(), Some(2));
    ok(d, &["interp", "--out", "o", "--seed-a", "1", "--seed-b", "2", "--steps", "4"]);
    assert_eq!(fs::read_to_string(d.join("o/interp.csv")).unwrap().lines().count(), 6);
    fs::write(d.join("t.csv"), "x,y\n2,0\n-2,0\n").unwrap();
    ok(d, &["project", "--out", "o", "--targets", "t.csv", "--metric", "manhattan"]);
    ok(d, &["invert", "--out", "o", "--targets", "t.csv", "--lambda-pres", "inf"]);
    ok(d, &["correlate", "--out", "o", "--samples", "300"]);
    ok(d, &["plot", "--out", "o", "--n", "50"]);
    for f in [
        "stats.csv",
        "cond_samples.csv",
        "gene_scores.csv",
        "realness.csv",
        "pruning_plan.json",
        "pruned.bin",
        "projection.csv",
        "inversion.csv",
        "inverted.bin",
        "correlation.csv",
        "scatter.svg",
    ] {
        assert!(d.join("o").join(f).exists(), "{f}");
    }
    // frozen inversion leaves the model untouched
    let a = load_checkpoint(&d.join("o/checkpoint.bin")).unwrap();
    let b = load_checkpoint(&d.join("o/inverted.bin")).unwrap();
    assert_eq!(a.model, b.model);
}

#[test]
fn probe_needs_gaussian_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    train_small(d, "g", "10");
    let mut args = vec!["train", "--out", "b", "--steps", "10", "--batch", "16", "--prior", "gaussian-mapping"];
    args.extend(SMALL);
    ok(d, &args);
    let s = ok(d, &["probe", "--out", "g", "--baseline", "b/checkpoint.bin", "--samples", "200"]);
    assert!(s.contains("mean accuracy genome"));
    assert_eq!(
        genelab(d, &["probe", "--out", "g", "--baseline", "g/checkpoint.bin", "--samples", "200"]).status.code(),
        Some(2)
    );
}

#[test]
fn config_file_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut cfg = genelab::io::RunConfig::default();
    cfg.train.steps = 5;
    cfg.train.dims = genelab::GenomeDims { n_g: 2, n_v: 3, d_g: 1 };
    cfg.out_dir = Some("from-config".into());
    cfg.save(&d.join("run.json")).unwrap();
    ok(d, &["train", "--config", "run.json"]);
    let ck = load_checkpoint(&d.join("from-config/checkpoint.bin")).unwrap();
    assert_eq!(ck.step, 5);
    assert_eq!(ck.model.dims().n_v, 3);
    fs::write(d.join("bad.json"), r#"{"schema_version": 1, "oops": true}"#).unwrap();
    assert_eq!(genelab(d, &["train", "--config", "bad.json"]).status.code(), Some(2));
}
