use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const DIAMOND: &str = "L = 1\nN = 2\nh_s = 1\nh_t = 2\nh_e = 1\nP_s = 1\nP = 10\nsigma2 = 1\n";

fn write_net(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("net.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(net: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_af-secrecy"))
        .arg("--net")
        .arg(net)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_reports_interior_diamond_solution() {
    let dir = TempDir::new().unwrap();
    let o = run(&write_net(&dir, DIAMOND), &["--cmd", "solve", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("case=GLB"), "{out}");
    let beta2: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("beta2_1="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((beta2 - 0.5f64.sqrt() / 2.0).abs() < 1e-12, "{beta2}");
}

#[test]
fn missing_key_is_named_and_exits_2() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, &DIAMOND.replace("sigma2 = 1\n", ""));
    let o = run(&net, &["--cmd", "rate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma2"));
}

#[test]
fn insecure_network_reports_zero_rate() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, &DIAMOND.replace("h_e = 1", "h_e = 3"));
    let o = run(&net, &["--cmd", "solve"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("case=ZERO") && out.contains("rate_bits=0.0"), "{out}");
}

#[test]
fn unwritable_output_fails() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, DIAMOND);
    let o = run(&net, &["--cmd", "rate", "--out", "/nonexistent-dir/out.txt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_k_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = run(&write_net(&dir, DIAMOND), &["--cmd", "gaps", "--k", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn source_power_sweep_writes_one_row_per_point() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, &DIAMOND.replace("N = 2", "N = 4"));
    let o = run(&net, &["--cmd", "sweep", "--k", "2", "--sweep", "P_s=1e-8,1e8,17,log"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 18);
    assert!(lines[0].starts_with("L,N,k,P_s,"));
    assert!(lines[1..].iter().all(|l| l.split(',').count() == lines[0].split(',').count()));
}

#[test]
fn sweep_without_range_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = run(&write_net(&dir, DIAMOND), &["--cmd", "sweep", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_on_the_diamond_fixture() {
    let dir = TempDir::new().unwrap();
    let o = run(&write_net(&dir, DIAMOND), &["--cmd", "verify"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().last(), Some("PASS"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn verify_skips_searches_over_the_axis_cap() {
    let dir = TempDir::new().unwrap();
    let net = "L = 3\nN = 4\nh_s = 1\nh_mid = 1, 2\nh_t = 4\nh_e = 2\nP_s = 1\nP = 0.01\nsigma2 = 1\n";
    let o = run(&write_net(&dir, net), &["--cmd", "verify", "--grid-steps", "16"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("SKIP symmetry"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: symmetry skipped"));
}
