//! End-to-end checks of the `cocycle-forge` binary: exit codes, output
//! layout, determinism, and thread-count resolution.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_cocycle-forge");

const SWEEP_CONFIG: &str = "\
experiment.kind = sweep
base.alpha = golden
cocycle.psi.kind = constant_rotation
cocycle.beta = 1.0
cocycle.rho.kind = fourier
cocycle.rho.fourier = 1:1,0; -1:0.25,-0.5
grid.size = 64
lambda.schedule = 0.9, 0.99
solver.eps = 1e-9
seed = 42
";

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cf-cli-{tag}-{}", std::process::id()));
    if dir.exists() {
        fs::remove_dir_all(&dir).unwrap();
    }
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

fn run_cli(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("COCYCLE_FORGE_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process was signalled")
}

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = scratch("ok");
    let cfg = write_config(&dir, SWEEP_CONFIG);
    let out_dir = dir.join("out");
    let out = run_cli(
        &["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
        &[],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    let hash = manifest["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert_eq!(manifest["seed"].as_u64(), Some(42));

    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), format!("# config_hash = {hash}"));
    assert_eq!(lines.next().unwrap(), "# seed = 42");
    assert!(lines.next().unwrap().starts_with("lambda,"));

    // every listed output exists on disk
    for name in manifest["outputs"].as_array().unwrap() {
        assert!(out_dir.join(name.as_str().unwrap()).exists(), "missing {name}");
    }
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn invalid_config_exits_two_without_output() {
    let dir = scratch("badcfg");
    let cfg = write_config(&dir, &SWEEP_CONFIG.replace("0.9, 0.99", "0.9, 1.5"));
    let out_dir = dir.join("out");
    let out = run_cli(
        &["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
        &[],
    );
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
    assert!(!out_dir.exists(), "failed run must not leave partial output");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn mid_run_failure_leaves_no_partial_output() {
    // parses cleanly, then fails inside the run: the paired Abel-Cesaro
    // comparison needs its first N to be at least 2
    let text = "\
experiment.kind = averaging
base.alpha = golden
cocycle.psi.kind = constant_rotation
cocycle.beta = 1.0
cocycle.rho.kind = constant
cocycle.rho.value = 1.0, 0.0
n.schedule = 1, 10, 100
";
    let dir = scratch("midrun");
    let cfg = write_config(&dir, text);
    let out_dir = dir.join("out");
    let out = run_cli(
        &["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
        &[],
    );
    assert_eq!(exit_code(&out), 2);
    assert!(!out_dir.exists(), "failed run must not leave partial output");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_config_exits_two() {
    let out = run_cli(&["run", "/nonexistent/path.cfg"], &[]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = scratch("det");
    let cfg = write_config(&dir, SWEEP_CONFIG);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out_dir in [&out_a, &out_b] {
        let out = run_cli(
            &["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
            &[],
        );
        assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read(out_a.join("sweep.csv")).unwrap();
    let b = fs::read(out_b.join("sweep.csv")).unwrap();
    assert_eq!(a, b, "identical config and seed must give byte-identical tables");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn list_prints_builtin_registry() {
    let out = run_cli(&["list"], &[]);
    assert_eq!(exit_code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    for name in ["circle", "constant_rotation", "fourier", "coboundary"] {
        assert!(stdout.contains(name), "missing registry row `{name}`");
    }
}

#[test]
fn list_appends_custom_registry_rows() {
    let dir = scratch("reg");
    let reg = dir.join("custom.reg");
    fs::write(
        &reg,
        "cocycle.psi.kind = diagonal_rotations\ncocycle.rho.kind = trig\n",
    )
    .unwrap();
    let out = run_cli(&["list", "--registry", reg.to_str().unwrap()], &[]);
    assert_eq!(exit_code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("custom twist"));
    assert!(stdout.contains("custom observable"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn thread_env_is_honored_and_validated() {
    let dir = scratch("threads");
    let cfg = write_config(&dir, SWEEP_CONFIG);
    let out_dir = dir.join("out");

    let ok = run_cli(
        &["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
        &[("COCYCLE_FORGE_THREADS", "2")],
    );
    assert_eq!(exit_code(&ok), 0);

    let bad = run_cli(
        &["run", cfg.to_str().unwrap(), "--out", dir.join("bad").to_str().unwrap()],
        &[("COCYCLE_FORGE_THREADS", "many")],
    );
    assert_eq!(exit_code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("COCYCLE_FORGE_THREADS"));
    assert!(!dir.join("bad").exists());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn thread_flag_beats_bad_environment() {
    let dir = scratch("flagwins");
    let cfg = write_config(&dir, SWEEP_CONFIG);
    let out_dir = dir.join("out");
    let out = run_cli(
        &[
            "run",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            "2",
        ],
        &[("COCYCLE_FORGE_THREADS", "many")],
    );
    assert_eq!(exit_code(&out), 0, "flag must take precedence over the environment");
    fs::remove_dir_all(&dir).unwrap();
}
