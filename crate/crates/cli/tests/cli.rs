//! End-to-end runs of the `heckelab` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heckelab")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// τ(1..=n) by multiplying out `q·∏(1 − q^m)^24` one factor at a time.
fn naive_tau(n: usize) -> Vec<i128> {
    let mut c = vec![0i128; n + 1];
    c[1] = 1;
    for m in 1..n {
        for _ in 0..24 {
            for i in (m + 1..=n).rev() {
                c[i] -= c[i - m];
            }
        }
    }
    c
}

#[test]
fn chars_table_for_twelve() {
    let out = run(&["chars", "12"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "modulus,index,order,conductor,primitive\n12,0,1,1,false\n12,1,2,4,false\n12,2,2,3,false\n12,3,2,12,true\n"
    );
}

#[test]
fn kfull_list_to_fifty() {
    let out = run(&["kfull", "list", "--x", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let listed: Vec<u64> = stdout(&out).lines().skip(1).map(|l| l.parse().unwrap()).collect();
    assert_eq!(listed, [1, 4, 8, 9, 16, 25, 27, 32, 36, 49]);
}

#[test]
fn progsum_matches_direct_sum() {
    let out = run(&["--format", "json", "progsum", "--x", "100", "--q", "1", "--cutoff-p", "1000", "--cutoff-u", "10000"]);
    assert_eq!(out.status.code(), Some(0));
    let row: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let tau = naive_tau(101);
    let direct: f64 = (1..=101).map(|n| (tau[n] as f64 / (n as f64).powf(5.5)).powi(4)).sum();
    let s = row["S"].as_f64().unwrap();
    assert!((s - direct).abs() < 1e-12 * direct, "{s} vs {direct}");
    assert_eq!(row["q"], 1);
    assert!(row["fitA"].is_null());
}

#[test]
fn constants_are_reproducible() {
    let args = ["constants", "--q", "3", "--cutoff-p", "1000", "--cutoff-u", "10000"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_suites_pass() {
    assert_eq!(run(&["--n", "20000", "verify", "kfull"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "characters"]).status.code(), Some(0));
    let out = run(&["series", "verify-factorization", "--q", "1,3,4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().skip(1).all(|l| l.contains(",pass,")), "{}", stdout(&out));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["verify", "nosuch"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "split", "--kernel", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["--n", "1", "verify", "hecke"]).status.code(), Some(2));
    assert_eq!(run(&["--n", "50", "progsum", "--x", "100"]).status.code(), Some(2));
}

fn write_cache(dir: &Path, n: usize) -> String {
    let path = dir.join("tau.csv").to_str().unwrap().to_owned();
    let out = run(&["--cache", &path, "--n", &n.to_string(), "tau"]);
    assert_eq!(out.status.code(), Some(0));
    path
}

#[test]
fn cache_is_reused_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_cache(dir.path(), 40);
    let fresh = run(&["--n", "30", "tau"]);
    let cached = run(&["--cache", &path, "--n", "30", "tau"]);
    assert_eq!(fresh.stdout, cached.stdout);

    let text = std::fs::read_to_string(&path).unwrap();
    let tampered = text.replace("\n7,-16744\n", "\n7,-16745\n");
    assert_ne!(text, tampered);
    std::fs::write(&path, tampered).unwrap();
    let out = run(&["--cache", &path, "--n", "30", "tau"]);
    assert_eq!(out.status.code(), Some(2));
}
