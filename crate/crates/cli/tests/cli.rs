use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use toepspec::toeplitz::read_binary;

fn toepspec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toepspec"))
        .args(args)
        .current_dir(dir)
        .env_remove("TOEPSPEC_MAX_ORDER")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn build_binary_round_trip() {
    let tmp = TempDir::new().unwrap();
    let out = toepspec(tmp.path(), &["build", "--id", "1", "--r", "2", "--n", "7", "--out", "t.bin"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = fs::read(tmp.path().join("t.bin")).unwrap();
    assert_eq!(&bytes[..8], b"TOEPMAT1");
    // k, s, n_1, then 14² (re, im) pairs
    assert_eq!(bytes.len(), 8 + 3 * 8 + 14 * 14 * 16);
    assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2);
    let (header, m) = read_binary(bytes.as_slice()).unwrap();
    assert_eq!(header.order(), 14);

    let csv = toepspec(tmp.path(), &["build", "--id", "1", "--r", "2", "--n", "7", "--out", "t.csv"]);
    assert!(csv.status.success());
    let text = fs::read_to_string(tmp.path().join("t.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 14);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 28);
        for j in 0..14 {
            assert_eq!(row[2 * j], m[(i, j)].re);
            assert_eq!(row[2 * j + 1], m[(i, j)].im);
        }
    }
    let man = manifest(&tmp.path().join("t.manifest.json"));
    assert_eq!(man["status"], "ok");
    assert_eq!(man["subcommand"], "build");
    assert_eq!(man["config"]["command"]["n"], "7");
}

#[test]
fn eigenvalue_rows_of_case_five() {
    let tmp = TempDir::new().unwrap();
    let out = toepspec(tmp.path(), &["eig", "--id", "5", "--n", "20,20", "--out", "eig.csv"]);
    assert!(out.status.success());
    let text = fs::read_to_string(tmp.path().join("eig.csv")).unwrap();
    assert_eq!(text.lines().count(), 800);
    assert!(text.lines().all(|l| l.split(',').count() == 2));
}

#[test]
fn outlier_counts_printed() {
    let tmp = TempDir::new().unwrap();
    let out = toepspec(tmp.path(), &["outliers", "--id", "5", "--n", "5,5", "--eps", "0.1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "prec 32 6.40"), "{text}");
    assert!(tmp.path().join("toepspec-manifest.json").exists());
}

#[test]
fn case_table_and_reports() {
    let tmp = TempDir::new().unwrap();
    let out = toepspec(tmp.path(), &["case", "--id", "1", "--r", "4.8", "--n", "30,60", "--out", "runs"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs = tmp.path().join("runs");
    let table = fs::read_to_string(runs.join("table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "n,unprec_iters,prec_iters");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("30,"));
    let history = fs::read_to_string(runs.join("case1_n60_prec_history.csv")).unwrap();
    assert!(history.starts_with("iter,relres\n1,"));
    let report: Value = serde_json::from_str(&fs::read_to_string(runs.join("case1_n60_prec.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["case"], 1);
    assert_eq!(report["seed"], 42);
    let man = manifest(&runs.join("manifest.json"));
    assert_eq!(man["exit_code"], 0);
    assert!(man["outputs"].as_array().unwrap().len() >= 9);
}

#[test]
fn same_seed_same_bytes() {
    let tmp = TempDir::new().unwrap();
    let run = |dir: &str, seed: &str| {
        let out = toepspec(tmp.path(), &["solve", "--id", "3", "--n", "40", "--seed", seed, "--out", dir]);
        assert!(out.status.success());
        let d = tmp.path().join(dir);
        (fs::read(d.join("report.json")).unwrap(), fs::read(d.join("report_history.csv")).unwrap(), fs::read(d.join("manifest.json")).unwrap())
    };
    let a = run("a", "7");
    let b = run("b", "7");
    let c = run("c", "8");
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_ne!(a.1, c.1);
    // manifests differ only in the output paths
    let strip = |bytes: &[u8]| String::from_utf8_lossy(bytes).replace("\"b\"", "\"a\"").replace("b/", "a/");
    assert_eq!(strip(&a.2), strip(&b.2));
}

#[test]
fn usage_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let out = toepspec(tmp.path(), &["eig", "--id", "5", "--n", "4,4", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = toepspec(tmp.path(), &["eig", "--id", "9", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(manifest(&tmp.path().join("toepspec-manifest.json"))["status"], "error");
}

#[test]
fn parse_check() {
    let tmp = TempDir::new().unwrap();
    let ok = toepspec(tmp.path(), &["parse-check", "--expr", "2 + 2*cos(x)", "--out", "sym.json"]);
    assert!(ok.status.success());
    let sym: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("sym.json")).unwrap()).unwrap();
    assert_eq!(sym["kind"], "trig");
    let bad = toepspec(tmp.path(), &["parse-check", "--expr", "2 + cos(x"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
}

#[test]
fn resource_limit_still_writes_manifest() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_toepspec"))
        .args(["eig", "--id", "1", "--r", "1", "--n", "40", "--manifest", "m.json"])
        .current_dir(tmp.path())
        .env("TOEPSPEC_MAX_ORDER", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let man = manifest(&tmp.path().join("m.json"));
    assert_eq!(man["status"], "error");
    assert_eq!(man["exit_code"], 3);
    assert!(man["error"].as_str().unwrap().contains("exceeds"));
}
