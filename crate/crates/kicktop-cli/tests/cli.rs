//! End-to-end checks of the `kicktop` binary: exit codes, artifacts,
//! configuration plumbing, and byte-identical reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kicktop(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kicktop"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn list_prints_the_experiment_table() {
    let out = kicktop(&["list"], &[]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 8, "{text}");
    assert!(text.contains("table1"));
    assert!(text.contains("Table 1"));
    assert!(text.contains("eigvec-q"));
    assert!(text.contains("Fig. 10"));
    assert!(text.contains("stability-scan"));
}

#[test]
fn unknown_experiment_is_a_config_error() {
    let out = kicktop(&["frobnicate", "--out", "/tmp/nowhere"], &[]);
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_out_dir_is_a_config_error() {
    let out = kicktop(&["portrait"], &[]);
    assert_eq!(code(&out), 2);
}

#[test]
fn invalid_grid_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = kicktop(
        &[
            "sweep-k",
            "--set",
            "k_grid=5:1:2",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 2);
    assert!(!out_dir.exists(), "no files on validation failure");
}

#[test]
fn zero_steps_rejected_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = kicktop(
        &[
            "sweep-k",
            "--set",
            "steps=0",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 2);
    assert!(!out_dir.exists());
}

#[test]
fn stability_scan_without_loss_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = kicktop(
        &[
            "stability-scan",
            "--set",
            "k_range=0.2:1.2",
            "--out",
            dir.path().join("run").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 3);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("no stability loss"), "{err}");
}

#[test]
fn stability_scan_finds_the_bifurcation() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = kicktop(
        &[
            "stability-scan",
            "--set",
            "k_range=1.5:2.5",
            "--set",
            "dk=0.1",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("stability.csv")).unwrap();
    let last = csv.lines().nth(1).unwrap();
    let kb: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!((kb - 2.0).abs() < 1e-3, "k_b = {kb}");
}

fn run_tiny_table1(out_dir: &Path, seed: &str) -> Output {
    kicktop(
        &[
            "table1",
            "--set",
            "j_list=4",
            "--set",
            "steps=30",
            "--seed",
            seed,
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    )
}

#[test]
fn table1_produces_artifacts_and_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&run_tiny_table1(&a, "11")), 0);
    assert_eq!(code(&run_tiny_table1(&b, "11")), 0);
    let csv_a = fs::read(a.join("table1.csv")).unwrap();
    let csv_b = fs::read(b.join("table1.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "reruns must be byte-identical");
    let text = String::from_utf8(csv_a).unwrap();
    assert!(text.starts_with("j,driver,D_mean,D_std,DG_mean,DG_std,Q_mean,Q_std,T,k,p,seed\n"));
    assert_eq!(text.lines().count(), 3);
    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    assert!(manifest.contains("experiment = table1"));
    assert!(manifest.contains("seed = 11"));
    // A different seed changes the COE row.
    let c = dir.path().join("c");
    assert_eq!(code(&run_tiny_table1(&c, "12")), 0);
    let csv_c = fs::read(c.join("table1.csv")).unwrap();
    assert_ne!(csv_b, csv_c);
}

#[test]
fn portrait_csv_has_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = kicktop(
        &[
            "portrait",
            "--set",
            "n_seeds=5",
            "--set",
            "n_orbit_steps=7",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(out_dir.join("portrait.csv")).unwrap();
    assert!(text.starts_with("orbit_id,step,theta,phi\n"));
    assert_eq!(text.lines().count(), 1 + 5 * 8);
}

#[test]
fn config_file_env_and_set_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(
        &cfg_path,
        "[experiment]\nname = portrait\nseed = 3\n[params]\nn_seeds = 4\nn_orbit_steps = 5\nk = 1.5\n",
    )
    .unwrap();
    let out_dir = dir.path().join("run");
    let out = kicktop(
        &[
            "portrait",
            "--config",
            cfg_path.to_str().unwrap(),
            "--set",
            "n_orbit_steps=2",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[("KICKTOP_K", "2.5"), ("KICKTOP_N_SEEDS", "3")],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    // env beats the file, --set beats env.
    assert!(manifest.contains("k = 2.5"), "{manifest}");
    assert!(manifest.contains("n_seeds = 3"));
    assert!(manifest.contains("n_orbit_steps = 2"));
    assert!(manifest.contains("seed = 3"));
}

#[test]
fn config_experiment_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(&cfg_path, "[experiment]\nname = portrait\n").unwrap();
    let out = kicktop(
        &[
            "sweep-k",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            dir.path().join("x").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_k_reports_jump_and_writes_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = kicktop(
        &[
            "sweep-k",
            "--set",
            "j=6",
            "--set",
            "k_grid=0.5:0.5:3",
            "--set",
            "steps=40",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("discord_jump_at_k ="));
    let long = fs::read_to_string(out_dir.join("sweep_k_long.csv")).unwrap();
    assert!(long.starts_with("axis_value,measure,value\n"));
    assert_eq!(long.lines().count(), 1 + 6 * 3);
}

#[test]
fn eigvec_q_runs_on_small_spins() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = kicktop(
        &[
            "eigvec-q",
            "--set",
            "j_list=0.5,2",
            "--set",
            "n_samples=5",
            "--set",
            "k_values=10,100",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("eigvec_q.csv")).unwrap();
    assert!(csv.starts_with("j,source,sector,n_vectors,Q_mean,Q_stderr,Q_analytic\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    assert!(csv.contains("0.5,coe"));
    assert!(csv.contains(",floquet,"));
}

#[test]
fn coe_compare_emits_the_ensemble_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = kicktop(
        &[
            "coe-compare",
            "--set",
            "j_list=3",
            "--set",
            "steps=25",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("ensemble.csv")).unwrap();
    assert!(csv.starts_with(
        "j,ensemble,n_samples,seed,D_mean,DG_mean,Q_mean,Q_analytic,stderr_D,stderr_DG,stderr_Q\n"
    ));
    assert!(csv.lines().nth(1).unwrap().starts_with("3,block_coe,1,7,"));
}
