use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use siegel_core::{hexfloat, SampledCurve};
use tempfile::TempDir;

fn siegel(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siegel"))
        .args(args)
        .current_dir(dir)
        .env_remove("SIEGEL_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn hex(v: &Value) -> f64 {
    hexfloat::parse(v.as_str().expect("hex string")).unwrap()
}

fn golden_radius(dir: &Path) -> f64 {
    let out = siegel(
        dir,
        &[
            "radius",
            "--theta",
            "golden",
            "--N",
            "2000",
            "--out",
            "golden.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    hex(&json(dir.join("golden.json"))["fit"]["radius"])
}

#[test]
fn radius_of_golden_mean_is_below_four() {
    let dir = TempDir::new().unwrap();
    let r = golden_radius(dir.path());
    assert!(r > 0.0 && r < 4.0, "r = {r}");
    assert!(dir.path().join("golden.json.manifest.json").exists());
}

#[test]
fn rational_angle_exits_with_domain_code() {
    let dir = TempDir::new().unwrap();
    let out = siegel(dir.path(), &["radius", "--theta", "1/3"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("RationalAngle"), "{}", stderr(&out));
}

#[test]
fn precision_shortfall_exits_with_precision_code() {
    let dir = TempDir::new().unwrap();
    let out = siegel(
        dir.path(),
        &[
            "radius",
            "--theta",
            "golden",
            "--N",
            "2000",
            "--precision",
            "8",
        ],
    );
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("PrecisionExhausted"));
}

#[test]
fn malformed_theta_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = siegel(dir.path(), &["radius", "--theta", "cf:[1,x]"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn radius_runs_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        let out = siegel(
            dir.path(),
            &[
                "radius", "--theta", "golden", "--N", "2000", "--out", "r.json",
            ],
        );
        assert_eq!(code(&out), 0);
    }
    let read = |d: &TempDir| std::fs::read(d.path().join("r.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn boundary_near_origin_is_a_small_circle() {
    let dir = TempDir::new().unwrap();
    let out = siegel(
        dir.path(),
        &[
            "boundary",
            "--theta",
            "golden",
            "--N",
            "500",
            "--r-fraction",
            "3e-6",
            "--M",
            "64",
            "--json",
            "--out",
            "c.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let curve =
        SampledCurve::from_json(&std::fs::read_to_string(dir.path().join("c.json")).unwrap())
            .unwrap();
    let r = match curve.source() {
        siegel_core::CurveSource::Series { radius, .. } => *radius,
        other => panic!("unexpected source {other:?}"),
    };
    for (k, z) in curve.points().iter().enumerate() {
        let t = std::f64::consts::TAU * k as f64 / 64.0;
        let expected = num_complex::Complex64::from_polar(r, t);
        assert!((z - expected).norm() < 2e-6, "k = {k}");
    }
}

#[test]
fn boundary_at_half_radius_winds_once() {
    let dir = TempDir::new().unwrap();
    let out = siegel(
        dir.path(),
        &[
            "boundary", "--theta", "golden", "--N", "1000", "--M", "1024", "--json", "--out",
            "c.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let curve =
        SampledCurve::from_json(&std::fs::read_to_string(dir.path().join("c.json")).unwrap())
            .unwrap();
    let pts = curve.points();
    let turn: f64 = (0..pts.len())
        .map(|k| (pts[(k + 1) % pts.len()] / pts[k]).arg())
        .sum();
    assert!((turn / std::f64::consts::TAU - 1.0).abs() < 1e-9);
}

#[test]
fn boundary_beyond_the_radius_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = siegel(
        dir.path(),
        &[
            "boundary",
            "--theta",
            "golden",
            "--N",
            "1000",
            "--r-fraction",
            "1.0",
        ],
    );
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("TailTooLarge"), "{}", stderr(&out));
}

fn profile(dir: &Path, shape: &[&str]) -> (f64, Value) {
    let mut args = vec!["synth", "--out", "shape.csv"];
    args.extend_from_slice(shape);
    assert_eq!(code(&siegel(dir, &args)), 0);
    let out = siegel(
        dir,
        &[
            "pinch-profile",
            "--curve",
            "shape.csv",
            "--out",
            "profile.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let witness: Value = serde_json::from_str(stdout.lines().last().unwrap()).unwrap();
    (hex(&witness["pinch"]), witness)
}

#[test]
fn circle_profile_is_one() {
    let dir = TempDir::new().unwrap();
    let (k, _) = profile(dir.path(), &["--shape", "circle", "--M", "256"]);
    assert!((k - 1.0).abs() < 1e-3, "K = {k}");
    let rows = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert_eq!(rows.lines().count(), 257);
}

#[test]
fn dumbbell_profile_exceeds_fifty() {
    let dir = TempDir::new().unwrap();
    let (k, witness) = profile(
        dir.path(),
        &["--shape", "dumbbell", "--M", "512", "--neck", "0.01"],
    );
    assert!(k > 50.0, "K = {k}");
    assert!(witness["i"].is_u64() && witness["j"].is_u64());
}

#[test]
fn empty_curve_file_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("empty.csv"), "").unwrap();
    let out = siegel(dir.path(), &["pinch-profile", "--curve", "empty.csv"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

fn experiment(dir: &Path, config: &Value, out: &str) -> Output {
    std::fs::write(dir.join("config.json"), config.to_string()).unwrap();
    siegel(
        dir,
        &["experiment", "--config", "config.json", "--out", out],
    )
}

fn rounds(path: PathBuf) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn identity_tail_reproduces_theta() {
    let dir = TempDir::new().unwrap();
    let r = golden_radius(dir.path());
    let config = serde_json::json!({
        "theta": "golden", "K": 1.05, "epsilon": 0.1,
        "r1": 0.3 * r, "r2": 0.5 * r,
        "cut_range": [3, 3], "tail_entries": [1],
        "series_n": 2000, "samples_m": 256,
    });
    let out = experiment(dir.path(), &config, "trace.jsonl");
    assert!(matches!(code(&out), 0 | 5), "{}", stderr(&out));
    let rows = rounds(dir.path().join("trace.jsonl"));
    assert_eq!(rows.len(), 1);
    assert_eq!(hex(&rows[0]["theta_distance"]), 0.0);
    let found = rows[0]["status"] == "found";
    assert_eq!(code(&out) == 0, found);
    assert!(dir.path().join("trace.jsonl.summary.json").exists());
    assert!(dir.path().join("trace.jsonl.manifest.json").exists());
}

#[test]
fn zero_epsilon_never_finds() {
    let dir = TempDir::new().unwrap();
    let config = serde_json::json!({
        "theta": "golden", "K": 1.2, "epsilon": 0.0,
        "r1": 0.05, "r2": 0.15,
        "cut_range": [2, 3], "tail_entries": [10, 100],
        "series_n": 1000, "samples_m": 128,
    });
    let out = experiment(dir.path(), &config, "trace.jsonl");
    assert_eq!(code(&out), 5, "{}", stderr(&out));
    assert!(rounds(dir.path().join("trace.jsonl"))
        .iter()
        .all(|r| r["status"] != "found"));
}

#[test]
fn empty_tail_grid_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let config = serde_json::json!({
        "theta": "golden", "K": 2.0, "epsilon": 0.1, "r1": 0.05, "r2": 0.15,
        "cut_range": [8, 8], "tail_entries": [],
    });
    let out = experiment(dir.path(), &config, "trace.jsonl");
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("NoCandidates"), "{}", stderr(&out));
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let config = serde_json::json!({
        "theta": "golden", "K": 1.2, "epsilon": 0.1, "r1": 0.05, "r2": 0.15,
        "cut_range": [2, 2], "tail_entries": [10], "series_n": 1000, "samples_m": 64,
    });
    std::fs::write(dir.path().join("config.json"), config.to_string()).unwrap();
    let out = siegel(
        dir.path(),
        &[
            "experiment",
            "--config",
            "config.json",
            "--tails",
            "10,20",
            "--cuts",
            "2:3",
        ],
    );
    assert!(matches!(code(&out), 0 | 5), "{}", stderr(&out));
    assert_eq!(rounds(dir.path().join("trace.jsonl")).len(), 4);
}

#[test]
fn replay_verify_reproduces_outputs() {
    let dir = TempDir::new().unwrap();
    let out = siegel(
        dir.path(),
        &["cf", "--theta", "cf:[2,2,2]+tail:1", "--out", "cf.json"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = siegel(dir.path(), &["replay", "--verify", "cf.json.manifest.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    std::fs::write(dir.path().join("cf.json"), "tampered").unwrap();
    let out = siegel(dir.path(), &["replay", "--verify", "cf.json.manifest.json"]);
    assert_eq!(code(&out), 1);
}
