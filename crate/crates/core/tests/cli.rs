// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use chainprop::io::{sha256_hex, RUN_RECORD_FILE};

fn chainprop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainprop"))
        .args(args)
        .env_remove("CHAINPROP_OUT")
        .output()
        .unwrap()
}

fn record(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(RUN_RECORD_FILE)).unwrap()).unwrap()
}

fn checksums(dir: &Path) -> Vec<(String, String)> {
    record(dir)["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| {
            (
                o["path"].as_str().unwrap().to_owned(),
                o["sha256"].as_str().unwrap().to_owned(),
            )
        })
        .collect()
}

#[test]
fn bounds_run_writes_checksummed_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = chainprop(&[
        "bounds",
        "--out",
        out,
        "--set",
        "chain.n=4",
        "--set",
        "chain.gamma=0.4",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = record(dir.path());
    assert_eq!(rec["experiment"], "bounds");
    assert_eq!(rec["config"]["chain"]["gamma"], 0.4);
    let sums = checksums(dir.path());
    assert!(!sums.is_empty());
    for (path, sha) in &sums {
        let bytes = std::fs::read(dir.path().join(path)).unwrap();
        assert_eq!(&sha256_hex(&bytes), sha, "{path}");
    }
    let csv = std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert!(csv.starts_with("t,"));
}

#[test]
fn invalid_gamma_is_reported_by_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = chainprop(&[
        "exact",
        "-o",
        dir.path().to_str().unwrap(),
        "-s",
        "chain.gamma=-1",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("chain.gamma"));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = chainprop(&[
        "exact",
        "-o",
        dir.path().to_str().unwrap(),
        "-s",
        "chain.gama=0.2",
    ]);
    assert!(!o.status.success());
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "experiment = \"exact\"\n[chain]\nlength = 4\n").unwrap();
    let o = chainprop(&[
        "exact",
        "-o",
        dir.path().to_str().unwrap(),
        "-c",
        cfg.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
}

#[test]
fn oversized_lindblad_chain_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = chainprop(&[
        "lindblad",
        "-o",
        dir.path().to_str().unwrap(),
        "-s",
        "chain.n=8",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("chain.n"));
}

#[test]
fn two_site_xx_is_not_mixing() {
    let dir = tempfile::tempdir().unwrap();
    let o = chainprop(&["mixing", "-o", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("mixing_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["verdict"], "not mixing");
}

#[test]
fn repeated_ensemble_runs_are_identical() {
    let args = |dir: &Path| {
        vec![
            "ensemble".to_owned(),
            "-o".to_owned(),
            dir.to_str().unwrap().to_owned(),
            "-s".to_owned(),
            "chain.n=12".to_owned(),
            "-s".to_owned(),
            "ensemble.trajectories=40".to_owned(),
            "-s".to_owned(),
            "time.t_max=2".to_owned(),
            "-s".to_owned(),
            "time.t_samples=11".to_owned(),
            "-s".to_owned(),
            "seed=99".to_owned(),
        ]
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let owned = args(dir.path());
        let refs: Vec<&str> = owned.iter().map(String::as_str).collect();
        let o = chainprop(&refs);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(checksums(a.path()), checksums(b.path()));
}

#[test]
fn output_directory_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_chainprop"))
        .args(["bounds", "-s", "chain.n=3"])
        .env("CHAINPROP_OUT", dir.path())
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join(RUN_RECORD_FILE).exists());
}

#[test]
fn printed_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = chainprop(&[
        "analyze",
        "--print-config",
        "-s",
        "chain.gamma=0.25",
        "-s",
        "analysis.front_eps=0.01",
    ]);
    assert!(o.status.success());
    let cfg = dir.path().join("printed.toml");
    std::fs::write(&cfg, &o.stdout).unwrap();
    let again = chainprop(&["analyze", "--print-config", "-c", cfg.to_str().unwrap()]);
    assert!(
        again.status.success(),
        "{}",
        String::from_utf8_lossy(&again.stderr)
    );
    assert_eq!(o.stdout, again.stdout);
    assert!(String::from_utf8_lossy(&o.stdout).contains("gamma = 0.25"));
}
