use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn hypgraph(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypgraph"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Temp dir holding `ball.json` and a solution in `sol/`.
fn solved_ball() -> TempDir {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("ball.json"), r#"{"kind":"ball","radius":1.0}"#).unwrap();
    let out = hypgraph(tmp.path(), &["solve", "--domain", "ball.json", "--h", "0.05", "--out", "sol"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    tmp
}

#[test]
fn solve_writes_artifacts() {
    let tmp = solved_ball();
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("sol/solve.json")).unwrap()).unwrap();
    assert_eq!(json["summary"]["converged"], true);
    assert_eq!(json["mesh_hash"].as_str().unwrap().len(), 64);
    let csv = fs::read_to_string(tmp.path().join("sol/solution.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x1,x2,value,d"));
    let max = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!((max - 1.0).abs() < 2e-3, "max f = {max}");
}

#[test]
fn usage_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("ball.json"), r#"{"kind":"ball","radius":1.0}"#).unwrap();
    assert_eq!(code(&hypgraph(tmp.path(), &["solve", "--domain", "missing.json"])), 1);
    assert_eq!(code(&hypgraph(tmp.path(), &["solve", "--domain", "ball.json", "--h", "-1"])), 1);
    assert_eq!(code(&hypgraph(tmp.path(), &["solve", "--domain", "ball.json", "--bogus"])), 1);
    assert_eq!(code(&hypgraph(tmp.path(), &["--help"])), 0);
    fs::write(tmp.path().join("square.json"), r#"{"kind":"convex_intersection","members":[{"kind":"stadium","length":4,"radius":0.5},{"kind":"stadium","length":4,"radius":0.5}]}"#)
        .unwrap();
    let out = hypgraph(tmp.path(), &["solve", "--domain", "square.json"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}

#[test]
fn stale_domain_is_a_mismatch() {
    let tmp = solved_ball();
    fs::write(tmp.path().join("other.json"), r#"{"kind":"ball","radius":1.1}"#).unwrap();
    let out = hypgraph(tmp.path(), &["check-invariants", "--domain", "other.json", "--solution", "sol"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let out = hypgraph(tmp.path(), &["holder", "--domain", "ball.json", "--solution", "sol", "--h", "0.04"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn barriers_and_negative_control() {
    let tmp = solved_ball();
    let run = |extra: &[&str]| {
        let mut args = vec!["verify-barrier", "--domain", "ball.json", "--solution", "sol", "--out", "b"];
        args.extend_from_slice(extra);
        hypgraph(tmp.path(), &args)
    };
    for extra in [&["--barrier", "hemisphere"][..], &["--barrier", "global"], &["--barrier", "local", "--point", "1,0"]] {
        let out = run(extra);
        assert_eq!(code(&out), 0, "{extra:?}: {}", stderr(&out));
    }
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("b/barrier.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    let out = run(&["--barrier", "global", "--scale-a", "0.5"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn report_bundle_and_determinism() {
    let tmp = solved_ball();
    let digest = |out_dir: &str, points: &[&str]| {
        let mut args = vec!["report", "--domain", "ball.json", "--solution", "sol", "--seed", "7", "--out", out_dir];
        args.extend_from_slice(points);
        let out = hypgraph(tmp.path(), &args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let bytes = fs::read(tmp.path().join(out_dir).join("report.json")).unwrap();
        (Sha256::digest(&bytes), serde_json::from_slice::<serde_json::Value>(&bytes).unwrap())
    };
    let points = ["--point", "1,0", "--point", "0,-1"];
    let (a, bundle) = digest("r1", &points);
    let (b, _) = digest("r2", &points);
    assert_eq!(a, b, "report bytes differ between identical runs");
    for key in ["holder", "exponents", "invariants", "expansions", "chaplygin"] {
        assert!(bundle.get(key).is_some(), "missing {key}");
    }
    assert_eq!(bundle["exponents"].as_array().unwrap().len(), 2);
    let (_, bare) = digest("r3", &[]);
    assert!(bare.get("exponents").is_none() && bare.get("expansions").is_none());
    assert!(bare.get("invariants").is_some());
}

#[test]
fn exponent_and_expansion_artifacts() {
    let tmp = solved_ball();
    let out = hypgraph(
        tmp.path(),
        &["estimate-exponent", "--domain", "ball.json", "--solution", "sol", "--point", "0,1", "--out", "e"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("e/exponents.json")).unwrap()).unwrap();
    let beta = json[0]["beta"].as_f64().unwrap();
    assert!((beta - 0.5).abs() < 0.05, "β = {beta}");
    assert!(fs::read_to_string(tmp.path().join("e/ray_0.csv")).unwrap().starts_with("x1,x2,d,f"));
    let out = hypgraph(
        tmp.path(),
        &["extract-expansion", "--domain", "ball.json", "--solution", "sol", "--point", "0,1", "--tol", "1e-6", "--out", "e"],
    );
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}
