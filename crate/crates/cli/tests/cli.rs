use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn lie_kam(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lie-kam"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("LIE_KAM_THREADS")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn simulate_fig1_writes_one_csv_per_initial_condition() {
    let dir = TempDir::new().unwrap();
    let o = lie_kam(
        &[
            "simulate", "--preset", "fig1", "--n", "10", "--seed", "7", "--T", "5",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..10 {
        let csv = fs::read_to_string(dir.path().join(format!("trajectory_{k:03}.csv"))).unwrap();
        assert!(csv.starts_with("t,M1,M2,M3\n"));
        let last = csv.lines().last().unwrap();
        assert!(last.starts_with("5,"), "{last}");
    }
    let report = json(&dir.path().join("simulate.json"));
    assert_eq!(report["seed"], 7);
    assert_eq!(report["config"]["n"], 10);
    assert_eq!(report["runs"].as_array().unwrap().len(), 10);
    assert_eq!(report["passed"], true);
}

#[test]
fn zero_length_run_has_only_a_header() {
    let dir = TempDir::new().unwrap();
    let o = lie_kam(&["simulate", "--preset", "fig1", "--T", "0"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read_to_string(dir.path().join("trajectory_000.csv")).unwrap(),
        "t,M1,M2,M3\n"
    );
}

#[test]
fn fig2_section_is_emitted() {
    let dir = TempDir::new().unwrap();
    let o = lie_kam(
        &[
            "simulate",
            "--preset",
            "fig2",
            "--eps",
            "1.0",
            "--section",
            "--T",
            "40",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("section_000.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,X,theta"));
    assert_eq!(lines.count(), 7);
    assert_eq!(
        json(&dir.path().join("simulate.json"))["runs"][0]["conservation"]["in_band"],
        true
    );
}

#[test]
fn section_command_skips_trajectories() {
    let dir = TempDir::new().unwrap();
    let o = lie_kam(&["section", "--preset", "fig1", "--T", "20"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("section_000.csv").exists());
    assert!(!dir.path().join("trajectory_000.csv").exists());
    assert_eq!(json(&dir.path().join("section.json"))["command"], "section");
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = [
        "simulate",
        "--preset",
        "fig2",
        "--eps",
        "0.5",
        "--n",
        "4",
        "--seed",
        "3",
        "--T",
        "10",
        "--section",
    ];
    assert_eq!(code(&lie_kam(&args, a.path())), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_lie-kam"))
        .args(args)
        .arg("--out")
        .arg(b.path())
        .env("LIE_KAM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    for name in ["simulate.json", "trajectory_003.csv", "section_002.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&lie_kam(&["simulate", "--preset", "fig3"], dir.path())),
        1
    );
    assert_eq!(
        code(&lie_kam(
            &["simulate", "--preset", "fig1", "--eps", "0.5"],
            dir.path()
        )),
        1
    );
    assert_eq!(code(&lie_kam(&["simulate", "--frobnicate"], dir.path())), 1);
    assert_eq!(code(&lie_kam(&["simulate", "--h", "-0.1"], dir.path())), 1);
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"simulate": {"preset": "fig1", "colour": 1}}"#).unwrap();
    assert_eq!(
        code(&lie_kam(
            &["simulate", "--config", cfg.to_str().unwrap()],
            dir.path()
        )),
        1
    );
    let o = Command::new(env!("CARGO_BIN_EXE_lie-kam"))
        .args(["verify", "--trials", "1"])
        .env("LIE_KAM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"seed": 11, "simulate": {"n": 2, "T": 3.0, "stride": 1}}"#,
    )
    .unwrap();
    let o = lie_kam(
        &["simulate", "--config", cfg.to_str().unwrap(), "--T", "1"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let report = json(&dir.path().join("simulate.json"));
    assert_eq!(report["seed"], 11);
    assert_eq!(report["T"], 1.0);
    assert_eq!(report["runs"].as_array().unwrap().len(), 2);
    assert_eq!(report["runs"][0]["samples"], 1001);
}

#[test]
fn verify_single_trial_passes() {
    let dir = TempDir::new().unwrap();
    let o = lie_kam(&["verify", "--trials", "1"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("verify.json"));
    let ids = report["identities"].as_array().unwrap();
    assert!(ids.len() >= 10);
    for id in ids {
        assert_eq!(id["trials"], 1);
        assert_eq!(id["passed"], true, "{id}");
        for key in ["identity", "max_residual", "window", "seed"] {
            assert!(id.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn verify_rejects_rational_frequency() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"verify": {"omega": -0.2}}"#).unwrap();
    let o = lie_kam(
        &["verify", "--trials", "1", "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("resonance") && err.contains("(l, m) = (1, 5)"),
        "{err}"
    );
}

#[test]
fn normalize_writes_snapshot_and_quadratic_probe() {
    let dir = TempDir::new().unwrap();
    let o = lie_kam(
        &["normalize", "--eps", "1e-3", "--preset", "pert1"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let snapshot = json(&dir.path().join("v_star.json"));
    assert!(snapshot.is_object());
    let report = json(&dir.path().join("normalize.json"));
    assert_eq!(report["passed"], true);
    let slope = report["quadratic"]["slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.1, "{slope}");
    assert_eq!(report["config"]["preset"], "pert1");
}

#[test]
fn normalize_needs_a_normal_form_preset() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&lie_kam(&["normalize", "--preset", "fig1"], dir.path())),
        1
    );
}

#[test]
fn iterate_writes_ledger_even_when_schedule_fails() {
    let dir = TempDir::new().unwrap();
    let o = lie_kam(&["iterate", "--steps", "3"], dir.path());
    let report = json(&dir.path().join("ledger.json"));
    let ledger = report["ledger"].as_array().unwrap();
    assert_eq!(ledger.len(), 3);
    let norms: Vec<f64> = ledger
        .iter()
        .map(|e| e["measured_norm"].as_f64().unwrap())
        .collect();
    assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
    assert_eq!(report["quadratic_within"], true);
    // Exit status follows the schedule check.
    let expected = if report["schedule_valid"] == true {
        0
    } else {
        2
    };
    assert_eq!(code(&o), expected);
}

#[test]
fn bounds_margins_are_nonnegative() {
    let dir = TempDir::new().unwrap();
    let o = lie_kam(
        &[
            "bounds",
            "--tau",
            "1",
            "--gamma-scan",
            "50",
            "--trials",
            "20",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("bounds.json"));
    assert_eq!(report["config"]["tau"], 1.0);
    assert_eq!(report["config"]["k_scan"], 50);
    for l in report["losses"].as_array().unwrap() {
        assert!(l["min_margin"].as_f64().unwrap() >= 0.0);
        assert!(l["constants"]["C"].as_f64().unwrap() > 0.0);
    }
}
