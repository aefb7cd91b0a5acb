use std::path::Path;
use std::process::{Command, Output};

use oneworld::cli::Manifest;

const BIN: &str = env!("CARGO_BIN_EXE_oneworld");
const CONFIGS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");

fn oneworld(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("ONEWORLD_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn config(name: &str) -> String {
    format!("{CONFIGS}/{name}.toml")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn run_into(scenario: &str, cfg: &str, out: &Path, extra: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut args = vec![scenario, "--config", cfg, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    oneworld(&args, envs)
}

#[test]
fn reruns_reproduce_the_manifest() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = config("paths");
    let first = run_into("paths", &cfg, a.path(), &[], &[]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let second = run_into("paths", &cfg, b.path(), &[], &[("ONEWORLD_THREADS", "3")]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let (ma, mb) = (Manifest::read(a.path()).unwrap(), Manifest::read(b.path()).unwrap());
    assert_eq!(ma, mb);
    assert!(ma.outputs.iter().any(|o| o.path == "ensemble.csv"));
    for o in &ma.outputs {
        let bytes = std::fs::read(a.path().join(&o.path)).unwrap();
        assert_eq!(bytes, std::fs::read(b.path().join(&o.path)).unwrap(), "{}", o.path);
    }
}

#[test]
fn seed_flag_changes_the_ensemble() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = config("paths");
    assert_eq!(run_into("paths", &cfg, a.path(), &["--seed", "1"], &[]).status.code(), Some(0));
    assert_eq!(run_into("paths", &cfg, b.path(), &["--seed", "2"], &[]).status.code(), Some(0));
    let read = |d: &Path| std::fs::read(d.join("ensemble.csv")).unwrap();
    assert_ne!(read(a.path()), read(b.path()));
    assert_eq!(Manifest::read(a.path()).unwrap().seed, 1);
}

#[test]
fn double_slit_without_paths_writes_fields_and_an_empty_spot_list() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("double_slit")).unwrap().replace("n_paths = 2000", "n_paths = 0");
    let cfg = write_config(dir.path(), "ds.toml", &text);
    let out = dir.path().join("out");
    let o = run_into("double_slit", &cfg, &out, &[], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let spots = std::fs::read_to_string(out.join("spots.csv")).unwrap();
    assert_eq!(spots.lines().count(), 1, "header only: {spots}");
    assert!(out.join("final.owf").exists());
}

#[test]
fn config_errors_exit_with_two_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("grid")).unwrap().replace("dt = 0.005", "dt = -0.005");
    let cfg = write_config(dir.path(), "bad.toml", &text);
    let o = run_into("grid", &cfg, &dir.path().join("out"), &[], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("time.dt"));

    let typo = std::fs::read_to_string(config("grid")).unwrap().replace("[potential]", "[potentail]");
    let cfg = write_config(dir.path(), "typo.toml", &typo);
    let o = run_into("grid", &cfg, &dir.path().join("out"), &[], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("potential"));

    let o = run_into("paths", &config("grid"), &dir.path().join("out"), &[], &[]);
    assert_eq!(o.status.code(), Some(2), "scenario mismatch");

    let o = run_into("grid", "/nonexistent/grid.toml", &dir.path().join("out"), &[], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn escaping_packet_is_a_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("grid")).unwrap().replace("q0 = [1.5]", "q0 = [19.0]");
    let cfg = write_config(dir.path(), "edge.toml", &text);
    let out = dir.path().join("out");
    let o = run_into("grid", &cfg, &out, &[], &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(Manifest::read(&out).is_ok(), "the manifest is written for failed runs");
}

#[test]
fn verify_subcommand_filters_and_reports() {
    let o = oneworld(&["verify", "--filter", "weierstrass"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("PASS [11] weierstrass_exactness"), "{text}");
    assert!(text.contains("1 of 1 criteria passed"));

    let none = oneworld(&["verify", "--filter", "no_such_criterion"], &[]);
    assert_eq!(none.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = oneworld(&["verify", "--config", &config("verify"), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(report.as_array().map(|a| a.len()), Some(1));
}

#[test]
fn usage_errors() {
    assert_ne!(oneworld(&["grid"], &[]).status.code(), Some(0));
    assert_ne!(oneworld(&["warp_drive", "--config", "x.toml"], &[]).status.code(), Some(0));
    assert_ne!(oneworld(&["verify", "--suite", "secondary"], &[]).status.code(), Some(0));
}
