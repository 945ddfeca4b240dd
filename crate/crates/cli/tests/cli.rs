use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn repqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repqed")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn fig2_starts_at_perfect_fidelity() {
    let out = repqed(&["figure", "fig2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# config_hash: sha256:"));
    let r = rows(&text);
    assert_eq!(r[0], ["n", "p", "f_1q", "f_ign", "f_qed_uniform", "f_qed_weighted", "f_qec"]);
    assert_eq!(r[1], ["2", "0", "1", "1", "1", "1", "1"]);
    assert_eq!(r.len(), 202);
}

#[test]
fn output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "mc.cfg", "[nqubit]\nn = 3\np_steps = 4\naverager = mc\nsamples = 2000\n");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = repqed(&["nqubit", "--config", &cfg, "--seed", "7", "--out", p.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = repqed(&["nqubit", "--config", &cfg, "--seed", "8"]);
    assert_ne!(fs::read(&a).unwrap(), c.stdout);
}

#[test]
fn ideal_override_for_fig5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ideal.cfg", "t1 = inf\ntheta_steps = 4\n");
    let out = repqed(&["figure", "fig5", "--config", &cfg]);
    assert!(out.status.success());
    let r = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(r[0], ["two_theta_over_pi", "t1_ns", "error_kind", "f_ign", "f_qed_weighted", "f_qec"]);
    assert_eq!(r[1], ["0", "inf", "R1X", "1", "1", "1"]);
}

#[test]
fn storage_sweep_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.cfg", "[storage]\nt1 = 500ns\np_steps = 5\n");
    let out = repqed(&["storage", "--config", &cfg, "--jobs", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(r[0], ["p_storage", "t1_ns", "f_ign", "f_qed_weighted"]);
    assert_eq!(r.len(), 7);
    for row in &r[2..] {
        let ign: f64 = row[2].parse().unwrap();
        let qed: f64 = row[3].parse().unwrap();
        assert!(qed > ign);
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bogus = write(dir.path(), "bogus.cfg", "command = bogus\n");
    let out = repqed(&["analytic", "--config", &bogus]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let bad_num = write(dir.path(), "num.cfg", "n = 2\n\np_max = 0.x\n");
    let out = repqed(&["analytic", "--config", &bad_num]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let missing = write(dir.path(), "missing.cfg", "p_max = 0.5\n");
    assert_eq!(repqed(&["analytic", "--config", &missing]).status.code(), Some(2));
    assert_eq!(repqed(&["analytic"]).status.code(), Some(2));
    assert_eq!(repqed(&["figure", "fig9"]).status.code(), Some(2));
    assert_eq!(repqed(&["verify", "--config", "/no/such/profile"]).status.code(), Some(2));
}

#[test]
fn duplicate_keys_warn() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "dup.cfg", "n = 2\np_steps = 2\np_steps = 3\n");
    let out = repqed(&["analytic", "--config", &cfg]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("overrides"));
    assert_eq!(rows(&String::from_utf8(out.stdout).unwrap()).len(), 5);
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.cfg", "n = 2\n");
    let target = dir.path().join("missing").join("out.csv");
    let out = repqed(&["analytic", "--config", &cfg, "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_exit_codes() {
    let out = repqed(&["verify"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));

    let dir = tempfile::tempdir().unwrap();
    let strict = write(dir.path(), "strict.cfg", "tolerance = 1e-17\nmc_samples = 2000\n");
    let out = repqed(&["verify", "--config", &strict]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("worst deviation"));
}
