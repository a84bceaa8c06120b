use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vortexlab"));
    c.env_remove("VORTEXLAB_SEED");
    c
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn vortexlab")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn drop_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("generated_at_unix");
    v
}

#[test]
fn translating_pair_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let o = run(&[
        "simulate",
        "--config",
        repo_config("translating_pair.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--emit-gnuplot",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let m_drift: f64 = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("M "))
        .expect("M drift line")
        .trim()
        .parse()
        .unwrap();
    assert!(m_drift <= 1e-8);

    let doc = read_json(&out.join("trajectory.json"));
    assert_eq!(doc["command"], "simulate");
    assert_eq!(doc["result"]["record"]["termination"]["cause"], "ReachedFinalTime");
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x1_x,x1_y,x2_x,x2_y,min_dist,H,M_x,M_y,I,C\r\n"));
    assert!(out.join("trajectory_min_dist.dat").exists());
}

#[test]
fn coincident_positions_rejected_before_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.json",
        r#"{"schema": 1, "intensities": [1.0, 2.0, 1.0], "positions": [[0, 0], [1, 1], [1, 1]],
            "kernel": {"kind": "euler"}, "final_time": 1.0}"#,
    );
    let out = tmp.path().join("out");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("vortices 2 and 3 coincide"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn config_typos_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "typo.json",
        r#"{"schema": 1, "intensities": [1.0, 2.0], "positions": [[0, 0], [1, 1]],
            "kernel": {"kind": "euler"}, "final_time": 1.0, "finaltime": 2.0}"#,
    );
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("finaltime"), "{}", stderr(&o));

    let cfg = write(
        tmp.path(),
        "schema.json",
        r#"{"schema": 2, "intensities": [1.0, 2.0], "positions": [[0, 0], [1, 1]],
            "kernel": {"kind": "euler"}, "final_time": 1.0}"#,
    );
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("schema"));
}

#[test]
fn collapse_demo_replays_into_underflow() {
    let tmp = tempfile::tempdir().unwrap();
    let demo = tmp.path().join("demo");
    let o = run(&[
        "collapse-demo",
        "--config",
        repo_config("collapse_demo.json").to_str().unwrap(),
        "--out",
        demo.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = read_json(&demo.join("collapse-demo.json"));
    assert!(doc["result"]["candidate"]["collapse_constraint"].as_f64().unwrap().abs() <= 1e-10);

    let replay = demo.join("collapse-demo_simulate.json");
    let o = run(&[
        "simulate",
        "--config",
        replay.to_str().unwrap(),
        "--out",
        tmp.path().join("replay").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn collapse_scan_reference_config() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("a/result.json");
    let second = tmp.path().join("b/result.json");
    for out in [&first, &second] {
        let o = run(&[
            "collapse-scan",
            "--config",
            repo_config("scan_s075.json").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            "2",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let a = read_json(&first);
    assert!(a["result"].get("fitted_exponent").is_some());
    assert!(a["result"]["fitted_exponent"].is_number());
    assert_eq!(a["seed"], 20240601);
    assert_eq!(a["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(drop_timestamp(a), drop_timestamp(read_json(&second)));
    assert_eq!(
        fs::read(tmp.path().join("a/result.csv")).unwrap(),
        fs::read(tmp.path().join("b/result.csv")).unwrap()
    );
}

#[test]
fn seed_flag_and_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "scan.json",
        r#"{"schema": 1, "s": 0.75, "anchor": 0, "intensities": [1.0, 1.0, -0.5], "rho": 1.0,
            "horizon": 0.2, "epsilons": [0.1], "samples_per_epsilon": 100, "rng_seed": 1,
            "integrator": {"rel_tol": 1e-6, "abs_tol": 1e-9, "max_step": 0.1, "min_step": 1e-12}}"#,
    );
    let seed_of = |extra: &[&str], env: Option<&str>, name: &str| {
        let out = tmp.path().join(name);
        let mut c = bin();
        c.args(["collapse-scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        c.args(extra);
        if let Some(v) = env {
            c.env("VORTEXLAB_SEED", v);
        }
        let o = c.output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        read_json(&out.join("scan.json"))["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(&[], None, "plain"), 1);
    assert_eq!(seed_of(&[], Some("9"), "env"), 9);
    assert_eq!(seed_of(&["--seed", "5"], Some("9"), "flag"), 5);
}

#[test]
fn scan_below_minimum_samples_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "scan.json",
        r#"{"schema": 1, "s": 0.75, "anchor": 0, "intensities": [1.0, 1.0, -0.5], "rho": 1.0,
            "horizon": 1.0, "epsilons": [0.1, 0.05], "samples_per_epsilon": 50, "rng_seed": 1,
            "integrator": {"rel_tol": 1e-6, "abs_tol": 1e-9, "max_step": 0.1, "min_step": 1e-12}}"#,
    );
    let out = tmp.path().join("out");
    let o = run(&["collapse-scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("samples_per_epsilon"));
    assert!(!out.exists());
}

#[test]
fn kernel_check_reference_grid() {
    // s ∈ {0.25, 0.5, 0.75, 1} × ε ∈ {0.5, 0.1, 0.01}: every condition holds.
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("kc");
    let o = run(&[
        "kernel-check",
        "--config",
        repo_config("kernel_check.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let doc = read_json(&out.join("kernel-check.json"));
    for entry in doc["result"].as_array().unwrap() {
        assert!(entry["report"]["junction_residual"].as_f64().unwrap() <= 1e-6);
    }
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn kernel_check_fractional_kernels_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "kc.json",
        r#"{"schema": 1, "kernels": [{"kind": "sqg", "s": 0.25}, {"kind": "sqg", "s": 0.5}, {"kind": "sqg", "s": 0.75}],
            "epsilons": [0.5, 0.1, 0.01]}"#,
    );
    let o = run(&["kernel-check", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn kernel_check_rejects_large_cutoff() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "kc.json",
        r#"{"schema": 1, "kernels": [{"kind": "euler"}], "epsilons": [0.6]}"#,
    );
    let out = tmp.path().join("out");
    let o = run(&["kernel-check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn invariants_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "invariants",
        "--config",
        repo_config("triangle_invariants.json").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("NonNeutralClusters"));
    let doc = read_json(&tmp.path().join("invariants.json"));
    assert_eq!(doc["result"]["clusters"]["min_subset_sum"], 0.5);
}
