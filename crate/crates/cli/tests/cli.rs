use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn forms_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../forms")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circlelab")).args(args).output().expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn form(name: &str) -> String {
    forms_dir().join(name).to_string_lossy().into_owned()
}

#[test]
fn compare_csv_header_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let f = form("ternary.form");
    for (out, threads) in [(&a, "1"), (&b, "4")] {
        let args = ["compare", "--form", &f, "--X", "100,200", "--x0", "0.5,0.5,0.5", "--delta", "0.2", "--seed", "7"];
        let mut v: Vec<&str> = args.to_vec();
        let o = out.to_str().unwrap();
        v.extend(["--out", o, "--threads", threads]);
        stdout_ok(&v);
    }
    let ta = std::fs::read(&a).unwrap();
    let tb = std::fs::read(&b).unwrap();
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("X,truth_primes,truth_lstar,truth_lambda,sigma_infty,series_Q,c,ratio,gap"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r.split(',').count(), 9);
        assert!(!r.contains(';'));
    }
}

#[test]
fn count_matches_small_enumeration() {
    // prime triples in [1, 30]^3 with p1^2 + p2^2 = 2 p3^2
    let primes: Vec<i64> = (2..=30).filter(|&n: &i64| (2..n).all(|d| n % d != 0)).collect();
    let mut want = 0;
    for &a in &primes {
        for &b in &primes {
            for &c in &primes {
                if a * a + b * b == 2 * c * c {
                    want += 1;
                }
            }
        }
    }
    let out = stdout_ok(&["count", "--form", &form("ternary.form"), "--X", "30"]);
    let row = out.lines().nth(1).unwrap();
    let points: u64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(points, want);
}

#[test]
fn sieve_rows() {
    let out = stdout_ok(&["sieve", "--limit", "12"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x,mu,lambda,lambda_star,sigma0,spf");
    assert_eq!(lines.len(), 13);
    assert!(lines[12].starts_with("12,0,0,0,6,2"));
}

#[test]
fn vaughan_verify_small_residual() {
    let out = stdout_ok(&["vaughan-verify", "--limit", "2000", "--U", "10", "--V", "100"]);
    let r: f64 = out.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!(r < 1e-9);
}

#[test]
fn expsum_modes_agree() {
    let f = form("ternary.form");
    let common = ["expsum", "--form", &f, "--N", "50", "--x0", "0.5,0.5,0.5", "--delta", "0.2", "--alpha", "2/7"];
    let direct = stdout_ok(&common);
    let mut v = common.to_vec();
    v.extend(["--mode", "vaughan", "--U", "3", "--V", "3"]);
    let split = stdout_ok(&v);
    let d: Vec<f64> = direct.lines().nth(1).unwrap().split(',').skip(1).take(2).map(|s| s.parse().unwrap()).collect();
    let t: Vec<f64> = split.lines().last().unwrap().split(',').skip(1).map(|s| s.parse().unwrap()).collect();
    assert!((d[0] - t[0]).abs() < 1e-6 && (d[1] - t[1]).abs() < 1e-6, "{direct} vs {split}");
}

#[test]
fn local_check_reports_obstruction() {
    let out = stdout_ok(&["local-check", "--form", &form("obstructed.form"), "--pmax", "5"]);
    let p2 = out.lines().find(|l| l.starts_with("2,")).unwrap();
    assert!(p2.contains("obstruction"));
    let ok = stdout_ok(&["local-check", "--form", &form("ternary.form"), "--pmax", "5"]);
    assert!(!ok.contains("obstruction"));
}

#[test]
fn analyze_form_thresholds() {
    let out = stdout_ok(&["analyze-form", "--form", &form("ternary.form")]);
    assert!(out.contains("c0_threshold,769"));
    assert!(out.contains("codim_threshold,597196800"));
    assert!(out.contains("hessian_codim,3"));
}

#[test]
fn rank_and_dichotomy() {
    let out = stdout_ok(&["rank", "--form", &form("split4.form")]);
    assert_eq!(out.lines().nth(1).unwrap().split(',').nth(1), Some("4"));
    let out = stdout_ok(&["dichotomy", "--form", &form("diag5.form"), "--c0", "1"]);
    assert!(out.lines().nth(1).unwrap().starts_with("II,"));
    let out = stdout_ok(&["dichotomy", "--form", &form("bilinear3.form"), "--c0", "1"]);
    assert!(out.lines().nth(1).unwrap().starts_with("I,"));
}

#[test]
fn arcs_listing() {
    let out = stdout_ok(&["arcs", "--N", "10000", "--d", "2", "--theta", "1/2"]);
    let rows = out.lines().skip(1).count();
    // q ≤ 100: 1 + Σ_{q=1}^{100} φ(q) centres, counting both 0/1 and 1/1
    let phi_sum: u64 = (1..=100u64).map(|q| (1..=q).filter(|a| gcd(*a, q) == 1).count() as u64).sum();
    assert_eq!(rows as u64, 1 + phi_sum);
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[test]
fn sigma_commands_produce_csv() {
    let f = form("ternary.form");
    let out = stdout_ok(&["sigma-series", "--form", &f, "--Q", "20", "--primes", "7"]);
    assert_eq!(out.lines().next(), Some("q,term,partial"));
    assert_eq!(out.lines().count(), 21);
    let out = stdout_ok(&["sigma-infty", "--form", &f, "--x0", "0.5,0.5,0.5", "--samples", "20000"]);
    assert!(out.contains("singular_integral,"));
    assert!(out.contains("epsilon_density,"));
}

#[test]
fn missing_form_is_an_error() {
    let o = run(&["rank"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--form"));
}
