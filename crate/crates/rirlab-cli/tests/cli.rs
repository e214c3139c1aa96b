//! End-to-end tests of the rirlab binary: exit codes, idempotency, and the
//! RIRLAB_SEED fallback.

use std::path::Path;
use std::process::{Command, Output};

fn rirlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rirlab"))
        .args(args)
        .current_dir(dir)
        .env_remove("RIRLAB_SEED")
        .output()
        .expect("spawn rirlab")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn missing_required_flag_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = rirlab(&["simulate", "--room", "6x5x3", "--src", "1,2,1.5"], dir.path());
    assert_exit(&out, 2);
}

#[test]
fn corrupt_wav_is_usage_error_and_missing_file_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.wav"), b"definitely not RIFF").unwrap();
    let out = rirlab(&["decompose", "bad.wav", "--tau-d", "0.01"], dir.path());
    assert_exit(&out, 2);

    let out = rirlab(&["decompose", "nope.wav", "--tau-d", "0.01"], dir.path());
    assert_exit(&out, 3);
}

#[test]
fn infeasible_geometry_is_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    // No sampleable room can hold a 30 m source-microphone distance.
    let out = rirlab(
        &[
            "dataset", "--out", "g", "--n", "5", "--duration", "0.5", "--r-min", "30",
            "--r-max", "31",
        ],
        dir.path(),
    );
    assert_exit(&out, 4);
}

#[test]
fn indivisible_n_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = rirlab(
        &["dataset", "--out", "ds", "--n", "7", "--folds", "5", "--duration", "0.5"],
        dir.path(),
    );
    assert_exit(&out, 2);
}

#[test]
fn simulate_decompose_metrics_roundtrip_and_idempotency() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--room", "6x5x3", "--alpha", "0.3", "--src", "1.2,2.0,1.5", "--mic",
        "4.0,3.1,1.7", "--out", "rir.wav",
    ];
    assert_exit(&rirlab(&args, dir.path()), 0);
    let first = std::fs::read(dir.path().join("rir.wav")).unwrap();
    assert_exit(&rirlab(&args, dir.path()), 0);
    let second = std::fs::read(dir.path().join("rir.wav")).unwrap();
    assert_eq!(first, second, "simulate is not idempotent");
    assert!(dir.path().join("rir.wav.json").exists());

    let out = rirlab(&["decompose", "rir.wav", "--out", "parts"], dir.path());
    assert_exit(&out, 0);
    for name in ["full", "direct", "nolate", "noearly"] {
        assert!(dir.path().join("parts").join(format!("{name}.wav")).exists());
    }
    assert!(dir.path().join("parts/boundaries.json").exists());

    let out = rirlab(&["metrics", "rir.wav"], dir.path());
    assert_exit(&out, 0);
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("metrics emits JSON");
    assert!(report["drr_db"].is_number());
    assert!(report["t60_sabine"].is_number(), "sidecar room feeds Sabine T60");
}

#[test]
fn dataset_seed_env_fallback_matches_flag() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["dataset", "--n", "5", "--duration", "0.5"];

    let mut with_flag = base.to_vec();
    with_flag.extend(["--out", "a", "--seed", "123"]);
    assert_exit(&rirlab(&with_flag, dir.path()), 0);

    let mut with_env = base.to_vec();
    with_env.extend(["--out", "b"]);
    let out = Command::new(env!("CARGO_BIN_EXE_rirlab"))
        .args(&with_env)
        .current_dir(dir.path())
        .env("RIRLAB_SEED", "123")
        .output()
        .unwrap();
    assert_exit(&out, 0);

    let a = std::fs::read(dir.path().join("a/manifest.json")).unwrap();
    let b = std::fs::read(dir.path().join("b/manifest.json")).unwrap();
    assert_eq!(a, b, "RIRLAB_SEED and --seed must produce identical manifests");

    let manifest: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(manifest["global_seed"], 123);

    let bad = Command::new(env!("CARGO_BIN_EXE_rirlab"))
        .args(["dataset", "--n", "5", "--duration", "0.5", "--out", "c"])
        .current_dir(dir.path())
        .env("RIRLAB_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_exit(&bad, 2);
}

#[test]
fn baselines_and_eval_produce_reports() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(
        &rirlab(&["dataset", "--n", "5", "--duration", "0.5", "--out", "ds"], dir.path()),
        0,
    );
    assert_exit(
        &rirlab(
            &["baselines", "--manifest", "ds/manifest.json", "--out", "preds.csv"],
            dir.path(),
        ),
        0,
    );
    assert_exit(
        &rirlab(
            &[
                "eval", "--manifest", "ds/manifest.json", "--predictions", "preds.csv", "--out",
                "results",
            ],
            dir.path(),
        ),
        0,
    );
    let matrix = std::fs::read_to_string(dir.path().join("results/results_matrix.csv")).unwrap();
    // Header plus 4 scenarios x 4 variants x 2 methods.
    assert_eq!(matrix.lines().count(), 1 + 32, "unexpected matrix rows:\n{matrix}");
    for cov in ["distance", "drr", "c50", "t60"] {
        assert!(dir.path().join(format!("results/ribbon_{cov}.csv")).exists());
    }
    assert!(dir.path().join("results/report.json").exists());

    // Unknown sample ids in the predictions are data errors.
    let mut preds = std::fs::read_to_string(dir.path().join("preds.csv")).unwrap();
    preds.push_str("999,fully_calibrated,full,onset-delay,5.0,5.0\n");
    std::fs::write(dir.path().join("tampered.csv"), preds).unwrap();
    let out = rirlab(
        &[
            "eval", "--manifest", "ds/manifest.json", "--predictions", "tampered.csv", "--out",
            "results2",
        ],
        dir.path(),
    );
    assert_exit(&out, 3);
}
