use std::path::Path;
use std::process::{Command, Output};

use phpnet::io::load_curves_csv;
use phpnet::model::config::{env_var_for, preset};

fn phpnet(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phpnet"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn sidecar(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_writes_curves_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = phpnet(
        &[
            "analyze",
            "--preset",
            "setup1",
            "--approach",
            "baseline_ppp,equivalent_density",
            "--sweep",
            "tau:-10:30:3",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let rows = load_curves_csv(&dir.path().join("analysis_tau.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(
        rows.iter().map(|r| r.value).collect::<Vec<_>>(),
        [-10.0, 10.0, 30.0, -10.0, 10.0, 30.0]
    );
    assert!(rows
        .iter()
        .all(|r| (0.0..=1.0).contains(&r.probability) && r.stderr.is_none()));

    let meta = sidecar(&dir.path().join("analysis_tau.json"));
    assert_eq!(meta["fingerprint"], preset("setup1").unwrap().fingerprint());
    assert_eq!(meta["diagnostics"].as_array().unwrap().len(), 2);
    assert!(meta["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn overrides_change_the_fingerprint() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "analyze",
        "--preset",
        "setup1",
        "--approach",
        "baseline_ppp",
        "--sweep",
        "tau:0:0:1",
    ];
    assert!(phpnet(&args, dir.path()).status.success());
    let plain = sidecar(&dir.path().join("analysis_tau.json"))["fingerprint"].clone();

    let mut with_set = args.to_vec();
    with_set.extend(["--set", "holes.radius=150"]);
    assert!(phpnet(&with_set, dir.path()).status.success());
    let meta = sidecar(&dir.path().join("analysis_tau.json"));
    assert_ne!(meta["fingerprint"], plain);
    assert_eq!(meta["config"]["hole_radius_m"], 150.0);

    let from_env = Command::new(env!("CARGO_BIN_EXE_phpnet"))
        .args(args)
        .arg("--out")
        .arg(dir.path())
        .env(env_var_for("holes.radius"), "150")
        .output()
        .unwrap();
    assert!(from_env.status.success());
    assert_eq!(
        sidecar(&dir.path().join("analysis_tau.json"))["fingerprint"],
        meta["fingerprint"]
    );
}

#[test]
fn simulation_output_does_not_depend_on_workers() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let base = [
        "simulate",
        "--preset",
        "setup1",
        "--trials",
        "300",
        "--seed",
        "5",
        "--sweep",
        "tau:-10:30:5",
    ];
    let mut one = base.to_vec();
    one.extend(["--workers", "1", "--dump-trials"]);
    let mut three = base.to_vec();
    three.extend(["--workers", "3"]);
    assert!(phpnet(&one, a.path()).status.success());
    assert!(phpnet(&three, b.path()).status.success());

    let csv = |d: &Path| std::fs::read(d.join("simulation_tau.csv")).unwrap();
    assert_eq!(csv(a.path()), csv(b.path()));
    let rows = load_curves_csv(&a.path().join("simulation_tau.csv")).unwrap();
    assert!(rows.iter().all(|r| r.approach == "simulation" && r.stderr.is_some()));
    assert!(rows.windows(2).all(|w| w[1].probability <= w[0].probability));

    let dump = std::fs::read_to_string(a.path().join("trials.csv")).unwrap();
    assert_eq!(dump.lines().count(), 301);
    assert!(dump.starts_with("trial_index,serving_tier,serving_state,serving_distance,sinr_db"));
    assert_eq!(sidecar(&a.path().join("simulation_tau.json"))["seed"], 5);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = phpnet(&["analyze", "--preset", "setup7"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("setup1") && err.contains("setup2"), "{err}");

    assert_eq!(
        phpnet(&["simulate", "--trials", "0"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        phpnet(&["analyze", "--approach", "fastest"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        phpnet(&["analyze", "--set", "holes.radius"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn validation_failure_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = phpnet(
        &[
            "validate",
            "--preset",
            "setup1",
            "--approach",
            "baseline_ppp",
            "--trials",
            "200",
            "--seed",
            "1",
            "--sweep",
            "tau:0:20:2",
            "--tolerance",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    let rows = load_curves_csv(&dir.path().join("validation_tau.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(dir.path().join("validation_tau_deviation.csv").exists());
}
