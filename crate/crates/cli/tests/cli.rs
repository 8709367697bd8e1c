use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn hflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hflow"))
        .args(args)
        .output()
        .expect("hflow runs")
}

fn write_config(dir: &Path, config: &Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn config(spacetime: Value, surface: Value, n: usize) -> Value {
    json!({
        "schema": "hflow-config/1",
        "spacetime": spacetime,
        "surface": surface,
        "grid": {"n_theta": n, "n_phi": 2 * n},
    })
}

fn bumpy(radius: f64) -> Value {
    json!({"family": "radial_graph", "radius": radius, "harmonics": [
        {"l": 2, "m": 1, "coefficient": 0.15},
        {"l": 3, "m": -2, "coefficient": 0.15},
        {"l": 1, "m": 0, "coefficient": 0.075}
    ]})
}

fn run_in(dir: &Path, cmd: &str, config: &Value) -> Output {
    let path = write_config(dir, config);
    let out = dir.join("out");
    hflow(&[
        cmd,
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn evaluate_schwarzschild_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        json!({"kind": "schwarzschild", "mass": 1.0}),
        json!({"family": "round_sphere", "radius": 3.0}),
        64,
    );
    let o = run_in(dir.path(), "evaluate", &c);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let mass = read_json(out.join("mass.json"));
    assert_eq!(mass["schema"], "hflow-mass/1");
    assert!((mass["m_h"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    let variation = read_json(out.join("variation.json"));
    assert_eq!(variation["variation"]["chi"], 2);
    assert_eq!(variation["variation"]["lines"].as_array().unwrap().len(), 5);
    assert!(variation["bhms"]["total"].is_number());
    assert_eq!(variation["certificate"]["pass"], true);
    for f in [
        "integrands.csv",
        "beta.csv",
        "lemma_integrand.csv",
        "surface.csv",
    ] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        assert!(text.lines().count() > 64 * 128, "{f}");
    }
}

#[test]
fn evaluate_minkowski_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        json!({"kind": "minkowski"}),
        json!({"family": "round_sphere", "radius": 1.0}),
        32,
    );
    let o = run_in(dir.path(), "evaluate", &c);
    assert_eq!(code(&o), 0);
    let mass = read_json(dir.path().join("out/mass.json"));
    assert!(mass["m_h"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn evaluate_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(
        json!({"kind": "schwarzschild", "mass": 1.0}),
        bumpy(4.0),
        24,
    );
    c["beta"] = json!({"kind": "prescribed", "harmonics": [{"l": 1, "m": 1, "coefficient": 0.3}]});
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    let path = write_config(dir.path(), &c);
    for out in [&first, &second] {
        let o = hflow(&[
            "evaluate",
            "--config",
            path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    for f in ["mass.json", "variation.json", "integrands.csv"] {
        assert_eq!(
            std::fs::read(first.join(f)).unwrap(),
            std::fs::read(second.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let negative = config(
        json!({"kind": "minkowski"}),
        json!({"family": "round_sphere", "radius": -1.0}),
        16,
    );
    let o = run_in(dir.path(), "evaluate", &negative);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("radius"));

    let mut wrong_schema = negative.clone();
    wrong_schema["schema"] = json!("hflow-config/0");
    wrong_schema["surface"]["radius"] = json!(1.0);
    assert_eq!(code(&run_in(dir.path(), "evaluate", &wrong_schema)), 2);

    let mut odd_grid = wrong_schema.clone();
    odd_grid["schema"] = json!("hflow-config/1");
    odd_grid["grid"] = json!({"n_theta": 11, "n_phi": 22});
    assert_eq!(code(&run_in(dir.path(), "evaluate", &odd_grid)), 2);

    let missing = hflow(&["evaluate", "--config", "/nonexistent/c.json", "--out", "x"]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn geometry_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // inside the horizon
    let c = config(
        json!({"kind": "schwarzschild", "mass": 1.0}),
        json!({"family": "round_sphere", "radius": 1.5}),
        16,
    );
    let o = run_in(dir.path(), "evaluate", &c);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn flow_of_a_round_minkowski_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        json!({"kind": "minkowski"}),
        json!({"family": "round_sphere", "radius": 1.0}),
        16,
    );
    let o = run_in(dir.path(), "flow", &c);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let s = read_json(out.join("summary.json"));
    assert_eq!(s["completed"], true);
    assert!((s["s_final"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((s["area_ratio"].as_f64().unwrap() - 1f64.exp()).abs() < 1e-8);
    assert!(s["m_h_drift"].as_f64().unwrap() <= 1e-9);
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("s,area,m_H,line1"));
    assert_eq!(lines.count(), s["steps"].as_u64().unwrap() as usize + 1);
}

#[test]
fn flow_of_a_schwarzschild_sphere_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(
        json!({"kind": "schwarzschild", "mass": 1.0}),
        json!({"family": "round_sphere", "radius": 3.0}),
        16,
    );
    c["flow"] = json!({"s_max": 0.5, "ds": 0.02});
    let o = run_in(dir.path(), "flow", &c);
    assert_eq!(code(&o), 0);
    let s = read_json(dir.path().join("out/summary.json"));
    assert!(s["min_mass_increment"].as_f64().unwrap() >= -1e-8);
    assert_eq!(s["monotone"], true);
}

#[test]
fn time_flat_flow_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(json!({"kind": "minkowski"}), bumpy(2.0), 16);
    c["beta"] = json!({"kind": "time_flat_poisson"});
    c["flow"] = json!({"s_max": 0.2, "ds": 0.01});
    let o = run_in(dir.path(), "flow", &c);
    assert_eq!(code(&o), 0);
    let s = read_json(dir.path().join("out/summary.json"));
    assert_eq!(s["monotone"], true);
    assert_eq!(s["certificate_pass_rate"], 1.0);
}

#[test]
fn step_failure_exits_3_with_partial_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(json!({"kind": "minkowski"}), bumpy(2.0), 16);
    c["flow"] = json!({"s_max": 0.2, "ds": 0.01, "area_step_tolerance": 1e-300});
    let o = run_in(dir.path(), "flow", &c);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("flow step failed"));
    let out = dir.path().join("out");
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let s = read_json(out.join("summary.json"));
    assert_eq!(s["completed"], false);
    assert!(s["stopped"].as_str().unwrap().contains("retries"));
}

#[test]
fn verify_default_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = hflow(&["verify", "--out", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}");
    let v = read_json(dir.path().join("verify.json"));
    assert_eq!(v["schema"], "hflow-verify/1");
    assert_eq!(v["seed"], 0xC0FFEE);
    assert_eq!(v["all_pass"], true);
    let names: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for expected in [
        "frame_orthonormality",
        "perp_involution",
        "trace_identities",
        "divergence_theorem",
        "gauss_bonnet",
        "poisson_eigen",
        "transform_law",
        "split_identity",
        "bhms_equality",
        "lemma_certificates",
        "fd_oracle",
        "dec_sampling",
        "schema",
    ] {
        assert!(names.contains(&expected), "{expected}");
    }
    assert_eq!(stdout.lines().count(), names.len());
}

#[test]
fn verify_only_runs_the_selected_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        &config(json!({"kind": "minkowski"}), bumpy(2.0), 24),
    );
    let run = |out: &str| {
        let out = dir.path().join(out);
        let o = hflow(&[
            "verify",
            "--only",
            "split_identity",
            "--config",
            path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        std::fs::read(out.join("verify.json")).unwrap()
    };
    let first = run("a");
    assert_eq!(first, run("b"), "verify.json is not deterministic");
    let v: Value = serde_json::from_slice(&first).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0]["name"], "split_identity");
}

#[test]
fn unachievable_fd_tolerance_fails_verify() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(json!({"kind": "minkowski"}), bumpy(2.0), 24);
    c["verify"] =
        json!({"random_surfaces": 1, "tolerances": {"fd_relative": 1e-12, "fd_absolute": 1e-12}});
    let path = write_config(dir.path(), &c);
    let o = hflow(&[
        "verify",
        "--only",
        "fd_oracle,split_identity",
        "--config",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("FAIL fd_oracle"), "{stdout}");
    assert!(stdout.contains("PASS split_identity"), "{stdout}");
}

#[test]
fn unknown_check_and_bad_threads_exit_2() {
    let o = hflow(&["verify", "--only", "nonsense"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown check"));
    let o = Command::new(env!("CARGO_BIN_EXE_hflow"))
        .args([
            "verify",
            "--only",
            "split_identity",
            "--out",
            std::env::temp_dir().to_str().unwrap(),
        ])
        .env("HFLOW_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
