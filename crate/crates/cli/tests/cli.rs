use std::path::Path;
use std::process::{Command, Output};

fn qlgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlgraph")).args(args).output().unwrap()
}

#[test]
fn list_experiments_names_every_bundled_descriptor() {
    let out = qlgraph(&["list-experiments"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig2a", "fig3", "fig4f"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from {text}");
    }
}

#[test]
fn show_round_trips_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = qlgraph(&["show", "fig4b"]);
    assert!(out.status.success());
    let path = dir.path().join("fig4b.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let v = qlgraph(&["validate", path.to_str().unwrap()]);
    assert!(v.status.success(), "{}", String::from_utf8_lossy(&v.stderr));
    assert!(String::from_utf8(v.stdout).unwrap().contains("1600 eigenvalues"));
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("c5");
    let out = qlgraph(&["run", "fig2a", "--out", target.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let spectrum = std::fs::read_to_string(target.join("spectrum.csv")).unwrap();
    assert_eq!(spectrum.lines().count(), 26);
    assert!(target.join("histogram.json").is_file());
}

#[test]
fn invalid_descriptor_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let desc = dir.path().join("bad.json");
    std::fs::write(
        &desc,
        r#"{"name":"bad","pipeline":"d-regular-product","factors":[{"basis":{"kind":"cycle","n":5}},{"basis":{"kind":"cycle","n":5}}],"n_samples":0,"master_seed":1}"#,
    )
    .unwrap();
    let target = dir.path().join("out");
    let out = qlgraph(&["run", desc.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "validation");
    assert!(!Path::new(&target).exists());
}

#[test]
fn unknown_experiment_is_a_validation_error() {
    let out = qlgraph(&["validate", "no-such-thing"]);
    assert_eq!(out.status.code(), Some(2));
}
