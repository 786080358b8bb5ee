use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use emhd_core::{Grid, Snapshot, SpectralField};
use tempfile::TempDir;

fn emhd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emhd"))
        .args(args)
        .current_dir(dir)
        .env_remove("EMHD_THREADS")
        .output()
        .expect("spawn emhd")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Rows of a CSV without its header, split into fields.
fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const ABC: &str = "n = 32\nmu = 0.1\nd_i = 1\ndt = 1e-3\nt_end = 0.05\ninit = abc\nsnapshot_every = 25\n";

#[test]
fn run_abc_writes_budget_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "abc.cfg", ABC);
    let o = emhd(&["run", cfg.to_str().unwrap(), "--out", "r"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = tmp.path().join("r");
    assert_eq!(
        header(&out.join("budget.csv")),
        "t,E,H,grad_l2,cum_dissipation,energy_ineq_residual"
    );
    let last = rows(&out.join("budget.csv")).pop().unwrap();
    let t: f64 = last[0].parse().unwrap();
    let h: f64 = last[2].parse().unwrap();
    let want = 744.15 * (-0.2 * t).exp();
    assert!((h - want).abs() < 0.01, "H={h} vs {want}");

    let m = manifest(&out);
    assert_eq!(m["command"], "run");
    assert_eq!(m["status"], "ok");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let artifacts: Vec<&str> = m["artifacts"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for a in ["snap_00000.bin", "snap_00002.bin", "log.csv", "budget.csv", "config.resolved"] {
        assert!(artifacts.contains(&a), "{a} missing from {artifacts:?}");
        assert!(out.join(a).exists());
    }
    let manifests = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().file_name() == "manifest.json").count();
    assert_eq!(manifests, 1);
}

#[test]
fn config_hash_covers_the_resolved_text_only() {
    let tmp = TempDir::new().unwrap();
    // Same settings spelled differently, with and without defaults.
    let a = write_config(tmp.path(), "a.cfg", "n = 8\nmu = 0.1\nd_i = 1\ndt = 1e-3\nt_end = 0\n");
    let b = write_config(
        tmp.path(),
        "b.cfg",
        "# comment\nt_end=0.0\nd_i = 1.0\ndt = 0.001\nmu = 0.10\nn = 8\ncfl_safety = 0.5\ninit = abc\n",
    );
    assert!(emhd(&["run", a.to_str().unwrap(), "--out", "a"], tmp.path()).status.success());
    assert!(emhd(&["run", b.to_str().unwrap(), "--out", "b"], tmp.path()).status.success());
    assert_eq!(manifest(&tmp.path().join("a"))["config_hash"], manifest(&tmp.path().join("b"))["config_hash"]);
}

#[test]
fn step_above_whistler_limit_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.cfg", "n = 16\nmu = 0\nd_i = 1\ndt = 0.2\nt_end = 1\n");
    let o = emhd(&["run", cfg.to_str().unwrap(), "--out", "c"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cfl_safety"), "{}", stderr(&o));
    assert!(!tmp.path().join("c").exists());
}

#[test]
fn bad_config_key_is_named() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.cfg", "n = 16\nmu = 0\nd_i = 1\ndt = 1e-3\nt_end = 1\nsnapshot_evry = 2\n");
    let o = emhd(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("snapshot_evry"));
    let o = emhd(&["run", "missing.cfg"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn instability_exits_two_and_keeps_partial_artifacts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "u.cfg",
        "n = 16\nmu = 0\nd_i = 1\ndt = 3\nt_end = 300\ninit = random_shells\ncfl_safety = 1000\n",
    );
    let o = emhd(&["run", cfg.to_str().unwrap(), "--out", "u"], tmp.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let out = tmp.path().join("u");
    assert_eq!(manifest(&out)["status"], "unstable");
    assert!(out.join("snap_00000.bin").exists());
    assert!(!rows(&out.join("budget.csv")).is_empty());
}

#[test]
fn zero_duration_run_keeps_one_snapshot() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "z.cfg", "n = 8\nmu = 0.1\nd_i = 1\ndt = 1e-3\nt_end = 0\n");
    let o = emhd(&["run", cfg.to_str().unwrap(), "--out", "z"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let snaps = fs::read_dir(tmp.path().join("z"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("snap_"))
        .count();
    assert_eq!(snaps, 1);
}

#[test]
fn diagnose_reports_besov_norm_of_a_single_mode() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.cfg",
        "n = 32\nmu = 0\nd_i = 1\ndt = 1e-3\nt_end = 0\ninit = single_mode(4,0,0)\n",
    );
    assert!(emhd(&["run", cfg.to_str().unwrap(), "--out", "s"], tmp.path()).status.success());
    let o = emhd(&["diagnose", "s/snap_00000.bin", "--besov", "0.333333:3:inf"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("q,lambda_q,shell_l2,shell_l3,b_q,beta_q\n"));
    let (_, besov) = text.split_once("s,p,q,besov_norm\n").expect("besov table");
    let v: f64 = besov.lines().next().unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((v - 7.496).abs() < 1e-3, "{v}");
}

#[test]
fn diagnose_of_zero_snapshot_is_all_zero() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("zero.bin");
    Snapshot::new(SpectralField::vector_zeros(Grid::new(16).unwrap()), 0.1, 1.0)
        .write(&path)
        .unwrap();
    let o = emhd(&["diagnose", "zero.bin"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines().skip(1).peekable();
    assert!(lines.peek().is_some());
    for line in lines {
        let cells: Vec<f64> = line.split(',').skip(2).map(|c| c.parse().unwrap()).collect();
        assert!(cells.iter().all(|&c| c == 0.0), "{line}");
    }
}

#[test]
fn corrupt_snapshots_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let good = Snapshot::new(emhd_core::field::init::abc_field(Grid::new(8).unwrap()), 0.1, 1.0).to_bytes();

    let mut bad = good.clone();
    bad[0] ^= 0xff;
    fs::write(tmp.path().join("bad.bin"), &bad).unwrap();
    let o = emhd(&["diagnose", "bad.bin"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad snapshot header"), "{}", stderr(&o));

    fs::write(tmp.path().join("short.bin"), &good[..good.len() - 100]).unwrap();
    let o = emhd(&["diagnose", "short.bin"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("byte offset"), "{}", stderr(&o));
    let o = emhd(&["flux", "short.bin"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn flux_of_abc_snapshot_has_zero_helicity_flux() {
    let tmp = TempDir::new().unwrap();
    Snapshot::new(emhd_core::field::init::abc_field(Grid::new(32).unwrap()), 0.1, 1.0)
        .write(tmp.path().join("abc.bin"))
        .unwrap();
    let o = emhd(&["flux", "abc.bin", "--out", "f"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = tmp.path().join("f");
    assert_eq!(header(&out.join("flux.csv")), "Q,H_Q,Pi_Q,kernel_bound,beta_bound");
    let rs = rows(&out.join("flux.csv"));
    assert_eq!(rs.len(), 7);
    for r in rs {
        let h: f64 = r[1].parse().unwrap();
        assert!(h.abs() < 1e-12, "{r:?}");
    }
    assert_eq!(manifest(&out)["command"], "flux");
}

const SMALL: &str = "n = 16\nmu = 0.05\nd_i = 1\ndt = 2e-3\nt_end = 0.02\ninit = random_shells\nseed = 3\n";

#[test]
fn uniqueness_without_perturbation_has_vanishing_difference() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "u.cfg", SMALL);
    let o = emhd(
        &["uniqueness", cfg.to_str().unwrap(), "--perturb", "0", "--seeds", "2", "--out", "u"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = tmp.path().join("u");
    for k in 0..2 {
        let f = out.join(format!("uniqueness_seed{k}.csv"));
        assert_eq!(header(&f), "t,Z_l2_sq,besov_time_norm,fitted_C,bound_ok");
        let rs = rows(&f);
        assert_eq!(rs.len(), 11);
        for r in rs {
            assert!(r[1].parse::<f64>().unwrap() <= 1e-12);
            assert_eq!(r[4], "true");
        }
    }
    assert_eq!(rows(&out.join("uniqueness_summary.csv")).len(), 2);
}

#[test]
fn uniqueness_is_independent_of_worker_count() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "u.cfg", SMALL);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = format!("u{threads}");
        let o = Command::new(env!("CARGO_BIN_EXE_emhd"))
            .args(["uniqueness", cfg.to_str().unwrap(), "--seeds", "3", "--out", &out])
            .current_dir(tmp.path())
            .env("EMHD_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let dir = tmp.path().join(&out);
        let texts: Vec<String> = ["uniqueness_seed0.csv", "uniqueness_seed1.csv", "uniqueness_seed2.csv", "uniqueness_summary.csv"]
            .iter()
            .map(|f| fs::read_to_string(dir.join(f)).unwrap())
            .collect();
        outputs.push(texts);
    }
    assert!(outputs[0] == outputs[1]);
    // A nonzero perturbation must leave a nonzero difference.
    let z: f64 = rows(&tmp.path().join("u1/uniqueness_seed0.csv")).last().unwrap()[1].parse().unwrap();
    assert!(z > 0.0);
}

#[test]
fn uniqueness_rejects_exponents_outside_the_region() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "u.cfg", SMALL);
    let o = emhd(&["uniqueness", cfg.to_str().unwrap(), "--p", "3", "--q", "2", "--r", "2"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("uniqueness region"), "{}", stderr(&o));
}

fn max_identity_residual(dir: &Path, cfg: &Path, testfn: &str, out: &str) -> f64 {
    let o = emhd(&["identity", cfg.to_str().unwrap(), "--testfn", testfn, "--out", out], dir);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let f = dir.join(out).join("identity.csv");
    assert_eq!(header(&f), "t,local_helicity,transport,dissipation,hall,residual");
    rows(&f)
        .iter()
        .map(|r| r[5].parse::<f64>().unwrap().abs())
        .fold(0.0, f64::max)
}

#[test]
fn identity_residual_converges() {
    let tmp = TempDir::new().unwrap();
    // φ ≡ 1: only the trapezoid rule in time contributes, so residuals shrink like dt².
    let coarse = write_config(tmp.path(), "c.cfg", SMALL);
    let fine = write_config(tmp.path(), "f.cfg", &SMALL.replace("dt = 2e-3", "dt = 1e-3"));
    let rc = max_identity_residual(tmp.path(), &coarse, "constant", "c");
    let rf = max_identity_residual(tmp.path(), &fine, "constant", "f");
    assert!(rc < 1e-6 && rc / rf > 3.5, "{rc} -> {rf}");

    // A nonconstant φ also sees the spectral truncation of the Hall term, so
    // refine the grid together with the step, from the same initial field.
    let b0 = emhd_core::field::init::random_shells(Grid::new(16).unwrap(), 1, 2, 21).unwrap();
    let mut residuals = Vec::new();
    for (n, dt) in [(16, 0.01), (32, 0.005)] {
        let snap = format!("b0_{n}.bin");
        Snapshot::new(b0.padded(Grid::new(n).unwrap()).unwrap(), 0.02, 1.0)
            .write(tmp.path().join(&snap))
            .unwrap();
        let cfg = write_config(
            tmp.path(),
            &format!("g{n}.cfg"),
            &format!("n = {n}\nmu = 0.02\nd_i = 1\ndt = {dt}\nt_end = 0.2\ninit = file({snap})\n"),
        );
        residuals.push(max_identity_residual(tmp.path(), &cfg, "standard", &format!("g{n}")));
    }
    assert!(residuals[0] < 1e-2 && residuals[0] / residuals[1] > 4.0, "{residuals:?}");

    let o = emhd(&["identity", coarse.to_str().unwrap(), "--testfn", "gaussian"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn region_prints_classification() {
    let tmp = TempDir::new().unwrap();
    let o = emhd(&["region", "--p", "3", "--q", "2", "--r", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "uniqueness_region\n");
    let o = emhd(&["region", "--p", "3", "--q", "inf", "--r", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = emhd(&["region", "--p", "0.5", "--q", "2", "--r", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let o = emhd(&["region", "--p", "3", "--q", "2"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(emhd(&["frobnicate"], tmp.path()).status.code(), Some(1));
    assert_eq!(emhd(&[], tmp.path()).status.code(), Some(1));
    assert_eq!(emhd(&["--help"], tmp.path()).status.code(), Some(0));
    assert_eq!(emhd(&["--version"], tmp.path()).status.code(), Some(0));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "r.cfg", SMALL);
    for out in ["a", "b"] {
        assert!(emhd(&["run", cfg.to_str().unwrap(), "--out", out], tmp.path()).status.success());
    }
    for f in ["log.csv", "budget.csv", "config.resolved", "snap_00010.bin"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
    assert_eq!(manifest(&tmp.path().join("a"))["config_hash"], manifest(&tmp.path().join("b"))["config_hash"]);
}

#[test]
fn run_output_round_trips_through_diagnose_and_init() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "r.cfg", SMALL);
    assert!(emhd(&["run", cfg.to_str().unwrap(), "--out", "a"], tmp.path()).status.success());
    let o = emhd(&["diagnose", "a/snap_00010.bin", "--besov", "1:2:2"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // Restart from the last snapshot.
    let restart = write_config(
        tmp.path(),
        "restart.cfg",
        "n = 16\nmu = 0.05\nd_i = 1\ndt = 2e-3\nt_end = 0\ninit = file(a/snap_00010.bin)\n",
    );
    let o = emhd(&["run", restart.to_str().unwrap(), "--out", "b"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let e_a = rows(&tmp.path().join("a/log.csv")).pop().unwrap()[1].clone();
    let e_b = rows(&tmp.path().join("b/log.csv"))[0][1].clone();
    let (e_a, e_b): (f64, f64) = (e_a.parse().unwrap(), e_b.parse().unwrap());
    assert!((e_a - e_b).abs() <= 1e-14 * e_a, "{e_a} vs {e_b}");
}
