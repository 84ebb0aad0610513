//! End-to-end exit-code and output-format checks for the binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_entroflow")
}

fn docs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("docs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("entroflow-smoke-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(bin())
        .args(args)
        .output()
        .expect("binary should run");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn malformed_config_exits_one() {
    let dir = tmp("bad");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.json");
    fs::write(&cfg, "{ \"n\": \"not a number\" }").unwrap();
    let (code, err) = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 1, "stderr: {err}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn missing_config_exits_one() {
    let (code, _) = run(&["simulate"]);
    assert_eq!(code, 1);
}

#[test]
fn simulate_uniform_initial_state_is_constant() {
    let dir = tmp("uniform");
    let cfg = serde_json::json!({
        "n": 8,
        "potential": {"kind": "zero"},
        "phi": {"kind": "identity"},
        "rho0": {"kind": "uniform"},
        "t_end": 0.2
    });
    fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("cfg.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let (code, err) = run(&["simulate", "--config", cfg_path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0, "stderr: {err}");
    let csv = fs::read_to_string(dir.join("simulate.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,rho_0"));
    assert!(header.ends_with("entropy,min_rho,max_rho,grad_norm"));
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        for rho in &fields[1..10] {
            assert!((rho - 1.0 / 9.0).abs() < 1e-9);
        }
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn simulate_sqrt_diffusion_grad_norm_monotone() {
    let dir = tmp("sqrt");
    let cfg = serde_json::json!({
        "n": 16,
        "potential": {"kind": "zero"},
        "phi": {"kind": "power", "alpha": 0.5},
        "rho0": {"kind": "gaussian-bump", "center": 0.5, "width": 0.15},
        "t_end": 0.3
    });
    fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("cfg.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let (code, err) = run(&["simulate", "--config", cfg_path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0, "stderr: {err}");
    let csv = fs::read_to_string(dir.join("simulate.csv")).unwrap();
    let grads: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    // the monotone quantity is the squared gradient sum; near equilibrium
    // the root sits at the integrator noise floor
    for w in grads.windows(2) {
        assert!(
            w[1] * w[1] <= w[0] * w[0] + 1e-8,
            "grad_norm not monotone: {} -> {}",
            w[0],
            w[1]
        );
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn geodesic_identical_endpoints_zero_distance() {
    let dir = tmp("geo0");
    let cfg = serde_json::json!({
        "n": 6,
        "path": "heat",
        "f": {"kind": "boltzmann"},
        "rho0": {"kind": "uniform"},
        "rho1": {"kind": "uniform"}
    });
    fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("cfg.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let (code, err) = run(&["geodesic", "--config", cfg_path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0, "stderr: {err}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("geodesic.json")).unwrap()).unwrap();
    assert_eq!(report["w"].as_f64().unwrap(), 0.0);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn geodesic_unreachable_tolerance_exits_three() {
    let dir = tmp("geo3");
    let cfg = serde_json::json!({
        "n": 6,
        "path": "heat",
        "f": {"kind": "boltzmann"},
        "rho0": {"kind": "gaussian-bump", "center": 0.3, "width": 0.2},
        "rho1": {"kind": "gaussian-bump", "center": 0.7, "width": 0.2},
        "tol": 0.0
    });
    fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("cfg.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let (code, _) = run(&["geodesic", "--config", cfg_path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 3);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn counterexample_finds_witness_exits_two() {
    let dir = tmp("cex");
    let (code, err) = run(&["counterexample", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 2, "stderr: {err}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("counterexample.json")).unwrap())
            .unwrap();
    assert_eq!(report["matches_reference"], serde_json::Value::Bool(true));
    assert!(report["witness"]["minor"].as_f64().unwrap() < 0.0);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn convexity_identity_reports_lambda_h() {
    // φ = id, γ = 1, h = 0.1: the report carries λ_h ≈ 0.99750416
    let dir = tmp("conv");
    let cfg = serde_json::json!({
        "n": 10,
        "path": "fokker-planck",
        "phi": {"kind": "identity"},
        "potential": {"kind": "quadratic", "gamma": 1.0},
        "state": {"kind": "uniform"}
    });
    fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("cfg.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let (code, err) = run(&["convexity", "--config", cfg_path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0, "stderr: {err}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("convexity.json")).unwrap()).unwrap();
    let lambda = report["states"][0]["report"]["lambda"].as_f64().unwrap();
    assert!((lambda - 0.9975041614635373).abs() < 1e-10);
    assert_eq!(report["all_certified"], serde_json::Value::Bool(true));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn convexity_heat_defaults_dominance_certified() {
    let dir = tmp("heatconv");
    let cfg = serde_json::json!({
        "n": 12,
        "path": "heat",
        "f": {"kind": "boltzmann"},
        "state": {"kind": "random", "count": 5}
    });
    fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("cfg.json");
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let (code, err) = run(&["convexity", "--config", cfg_path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0, "stderr: {err}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("convexity.json")).unwrap()).unwrap();
    for state in report["states"].as_array().unwrap() {
        assert_eq!(
            state["report"]["certificate"]["kind"],
            serde_json::Value::String("dominance_certified".into())
        );
        assert_eq!(state["report"]["lambda"].as_f64().unwrap(), 0.0);
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn bad_field_error_names_the_path() {
    let dir = tmp("badfield");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.json");
    fs::write(
        &cfg,
        r#"{"n": 8, "potential": {"kind": "zero"}, "phi": {"kind": "power", "alpha": "x"}, "rho0": {"kind": "uniform"}, "t_end": 0.1}"#,
    )
    .unwrap();
    let (code, err) = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("phi"), "error should name the field path: {err}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn verify_means_with_example_config() {
    let dir = tmp("means");
    let cfg = docs().join("verify_means.json");
    let (code, err) = run(&[
        "verify-means",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("verify_means.json")).unwrap()).unwrap();
    assert_eq!(report["all_passed"], serde_json::Value::Bool(true));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn example_configs_parse_and_run() {
    // every documented example config must stay valid
    let dir = tmp("docs");
    for (cmd, cfg, expected) in [
        ("simulate", "simulate.json", 0),
        ("convexity", "convexity.json", 0),
        ("geodesic", "geodesic.json", 0),
        ("lambda", "lambda.json", 0),
        ("counterexample", "counterexample.json", 2),
        ("verify-means", "verify_means.json", 0),
    ] {
        let cfg = docs().join(cfg);
        let (code, err) = run(&[cmd, "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
        assert_eq!(code, expected, "{cmd}: {err}");
    }
    let _ = fs::remove_dir_all(&dir);
}
