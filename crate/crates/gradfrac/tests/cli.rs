//! End-to-end tests of the `gradfrac` binary: exit codes, config
//! validation messages, determinism of outputs, snapshot roundtrip and
//! the sweep subcommand.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gradfrac"))
}

const SMALL_BL: &str = r#"
[case]
kind = "boundary_layer"
outer_radius = 20.0
core_size = 2.0
strip_ahead = 0.8
strip_behind = 0.4
strip_height = 0.4
h = 0.1
k_max = 100.0

[material]
E = 71480.0
nu = 0.3
sigma_Y = 345.0
hardening = { type = "power_law", N = 0.2 }

[fracture]
Gc = 9.31
ell_f = 0.5

[solver]
n_increments = 2
"#;

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn check_prints_reference_quantities_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_BL);
    let out = bin().arg("check").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("K0 ="), "stdout: {stdout}");
    assert!(stdout.contains("sigma_hat ="));
    assert!(stdout.contains("config ok"));
}

#[test]
fn check_rejects_invalid_config_with_key_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL_BL.replace("nu = 0.3", "nu = 0.7"));
    let out = bin().arg("check").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("material.nu"), "stderr: {stderr}");
}

#[test]
fn unknown_subcommand_exits_two_with_usage() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage") || stderr.contains("usage"), "stderr: {stderr}");
}

#[test]
fn missing_config_file_exits_one() {
    let out = bin().arg("run").arg("/nonexistent/nope.toml").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_twice_identical_outputs_and_roundtrip_phi() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let body = format!(
        "{SMALL_BL}\n[output]\ndirectory = \"{}\"\nsnapshot_interval = 2\n",
        out_a.display()
    );
    let cfg_a = write_config(dir.path(), &body);
    assert!(bin().arg("run").arg(&cfg_a).status().unwrap().success());
    let body_b = body.replace(&out_a.display().to_string(), &out_b.display().to_string());
    fs::write(dir.path().join("config_b.toml"), &body_b).unwrap();
    assert!(bin()
        .arg("run")
        .arg(dir.path().join("config_b.toml"))
        .status()
        .unwrap()
        .success());

    // Identical curve files and identical final snapshots, byte for byte.
    let curve_a = fs::read(out_a.join("rcurve.csv")).unwrap();
    let curve_b = fs::read(out_b.join("rcurve.csv")).unwrap();
    assert_eq!(curve_a, curve_b);
    let snap_a = fs::read(out_a.join("step_0002.vtu")).unwrap();
    let snap_b = fs::read(out_b.join("step_0002.vtu")).unwrap();
    assert_eq!(snap_a, snap_b);

    // The seeded crack face is visible in the step-0 snapshot.
    let phi0 = gradfrac::io::read_vtu_phi(&out_a.join("step_0000.vtu")).unwrap();
    assert!(phi0.iter().any(|&v| v == 1.0), "no phi = 1 seed in step 0");
    assert!(phi0.iter().all(|&v| (0.0..=1.0).contains(&v)));
}

#[test]
fn sweep_runs_one_directory_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out_root = dir.path().join("sweep");
    let body = format!(
        "{SMALL_BL}\n[output]\ndirectory = \"{}\"\nsnapshot_interval = 10\n",
        out_root.display()
    );
    let cfg = write_config(dir.path(), &body);
    let out = bin()
        .arg("sweep")
        .arg(&cfg)
        .args(["--param", "material.ell_p", "--values", "0,1.0"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for v in ["0", "1"] {
        let sub = out_root.join(format!("material.ell_p={v}"));
        assert!(sub.join("rcurve.csv").is_file(), "missing {}", sub.display());
    }
    let bad = bin()
        .arg("sweep")
        .arg(&cfg)
        .args(["--param", "material.nope.deep", "--values", "1"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
