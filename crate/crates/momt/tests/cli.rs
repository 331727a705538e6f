use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn momt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momt"))
        .args(args)
        .current_dir(dir)
        .env_remove("MOMT_TOL")
        .output()
        .unwrap()
}

fn scalar_instance(dir: &Path, name: &str, t: f64) {
    let text = format!(
        r#"{{"n":1,"dim_out":1,"dim_in":1,"sigma":["","1"],"moments":{{"":[[[1,0]]],"1":[[[{t},0]]]}}}}"#
    );
    std::fs::write(dir.join(name), text).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn min_eig(v: &Value) -> f64 {
    v["min_eigenvalue"].as_f64().unwrap()
}

#[test]
fn scalar_contraction_is_feasible() {
    let dir = tempfile::tempdir().unwrap();
    scalar_instance(dir.path(), "half.json", 0.5);
    let out = momt(dir.path(), &["check", "--problem", "poisson", "-i", "half.json", "-o", "r.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["pass"], Value::Bool(true));
    assert!(min_eig(&r).abs() < 1e-12);
}

#[test]
fn scalar_beyond_the_ball_exits_one_and_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    scalar_instance(dir.path(), "two.json", 2.0);
    let out = momt(dir.path(), &["check", "--problem", "poisson", "-i", "two.json", "-o", "r.json"]);
    assert_eq!(out.status.code(), Some(1));
    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["pass"], Value::Bool(false));
    assert!((min_eig(&r) + 3.0).abs() < 1e-12);
    let out = momt(dir.path(), &["synthesize", "--problem", "poisson", "-i", "two.json", "-o", "c.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("c.json").exists());
}

#[test]
fn generate_synthesize_verify_chain() {
    let dir = tempfile::tempdir().unwrap();
    let steps: [&[&str]; 3] = [
        &["gen", "--kind", "row-contraction", "--n", "2", "--dim", "2", "--depth", "2", "--seed", "7", "-o", "g.json"],
        &["synthesize", "--problem", "poisson", "-i", "g.json", "-o", "c.json"],
        &["verify", "--problem", "poisson", "-i", "g.json", "-c", "c.json", "--depth", "60", "-o", "v.json"],
    ];
    for args in steps {
        let out = momt(dir.path(), args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let v = read_json(&dir.path().join("v.json"));
    assert_eq!(v["pass"], Value::Bool(true));
    assert!(v["details"]["poisson_residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    scalar_instance(dir.path(), "half.json", 0.5);
    let cases: [&[&str]; 5] = [
        &["check", "--problem", "poisson", "-i", "missing.json"],
        &["check", "--problem", "poisson", "-i", "half.json", "--lambda", "2.1=-1"],
        &["check", "--problem", "poisson", "-i", "half.json", "--tol", "-1"],
        &["check", "--problem", "nonsense", "-i", "half.json"],
        &["verify", "--problem", "poisson", "-i", "half.json", "-c", "half.json", "--r", "0.5"],
    ];
    for args in cases {
        assert_eq!(momt(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn batch_writes_one_report_per_input() {
    let dir = tempfile::tempdir().unwrap();
    scalar_instance(dir.path(), "a.json", 0.5);
    scalar_instance(dir.path(), "b.json", 2.0);
    let out = momt(
        dir.path(),
        &["check", "--problem", "poisson", "-i", "a.json", "-i", "b.json", "--jobs", "2", "-o", "out"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(read_json(&dir.path().join("out/a.check.json"))["pass"], Value::Bool(true));
    assert_eq!(read_json(&dir.path().join("out/b.check.json"))["pass"], Value::Bool(false));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("a.json") && table.contains("FAIL"));
}

#[test]
fn tolerance_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    // 1 - t^2 = -1e-6 fails at the default tolerance and passes at 1e-5
    scalar_instance(dir.path(), "edge.json", 1.0000005);
    let args = ["check", "--problem", "poisson", "-i", "edge.json", "-o", "r.json"];
    assert_eq!(momt(dir.path(), &args).status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_momt"))
        .args(args)
        .current_dir(dir.path())
        .env("MOMT_TOL", "1e-5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
