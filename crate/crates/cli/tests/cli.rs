use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    repo().join("fixtures").join(name)
}

fn webrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_webrank"))
        .args(args)
        .env_remove("WEBRANK_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn write_spec(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn scratch_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("webrank-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn rank_of_rank_two_web() {
    let out = webrank(&["rank", fixture("w4-r2.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["results"]["rank"]["verdict"]["rank"], 2);
    assert_eq!(r["results"]["rank"]["criterion"], "rank-two");
    assert_eq!(r["status"], "ok");
}

#[test]
fn bol_is_not_linearizable() {
    let out = webrank(&["linearizable", fixture("w5-bol.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["results"]["linearizability"]["verdict"], "not-linearizable");
    assert_eq!(r["results"]["linearizability"]["geodesic"], false);
}

#[test]
fn log_relation_of_rank_one_web() {
    let out = webrank(&["verify-relation", fixture("w4-r1.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["results"]["relations"][0]["holds"], true);
}

#[test]
fn abel_keeping_the_sum_function() {
    let out = webrank(&["abel", fixture("w4-r3.toml").to_str().unwrap(), "--order", "2,4,1,3"]);
    let r = json(&out);
    assert_eq!(r["input"]["functions"][3], "x + y");
    assert_eq!(r["results"]["abel"]["order"], 3);
    assert_eq!(r["results"]["abel"]["separable"], true);
}

#[test]
fn reports_are_deterministic() {
    let path = fixture("w4-r1nl.toml");
    let a = webrank(&["analyze", path.to_str().unwrap(), "--seed", "11"]);
    let b = webrank(&["analyze", path.to_str().unwrap(), "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = webrank(&["analyze", path.to_str().unwrap(), "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn every_fixture_analyzes() {
    let mut n = 0;
    for entry in std::fs::read_dir(repo().join("fixtures")).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let out = webrank(&["analyze", p.to_str().unwrap()]);
            assert_eq!(out.status.code(), Some(0), "{}: {}", p.display(), String::from_utf8_lossy(&out.stderr));
            let r = json(&out);
            assert!(r["errors"].as_array().unwrap().is_empty(), "{}", p.display());
            n += 1;
        }
    }
    assert_eq!(n, 9);
}

#[test]
fn golden_reports() {
    let cases = [
        ("rank", "w4-r2.toml", "rank-w4-r2.json"),
        ("curvature", "w4-r3.toml", "curvature-w4-r3.json"),
        ("geodesic", "w5-bol.toml", "geodesic-w5-bol.json"),
        ("verify-relation", "w4-r3.toml", "relations-w4-r3.json"),
    ];
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for (cmd, file, golden) in cases {
        let out = webrank(&[cmd, fixture(file).to_str().unwrap(), "--seed", "7"]);
        assert_eq!(out.status.code(), Some(0));
        let path = dir.join(golden);
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::write(&path, &out.stdout).unwrap();
        }
        let expected = std::fs::read(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
        assert!(out.stdout == expected, "report for {cmd} {file} differs from {golden}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = scratch_dir("out");
    let target = dir.join("report.json");
    let out = webrank(&["rank", fixture("w3-par.toml").to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(&target).unwrap()).unwrap();
    assert_eq!(r["results"]["rank"]["verdict"]["rank"], 1);
}

#[test]
fn input_errors_exit_one() {
    let dir = scratch_dir("errors");
    let degenerate = write_spec(&dir, "deg.toml", "name = \"d\"\nfunctions = [\"x\", \"y\", \"2*x\"]\nbox = [1.0, 2.0, 1.0, 2.0]\n");
    let out = webrank(&["rank", degenerate.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("f1") && err.contains("f3"), "{err}");

    let flat = write_spec(&dir, "flat.toml", "name = \"f\"\nfunctions = [\"x\", \"y\", \"x + y\"]\nbox = [1.0, 1.0, 1.0, 2.0]\n");
    assert_eq!(webrank(&["rank", flat.to_str().unwrap()]).status.code(), Some(1));

    let good = fixture("w3-par.toml");
    assert_eq!(webrank(&["frobnicate", good.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(webrank(&["rank", "/nonexistent/web.toml"]).status.code(), Some(1));
    assert_eq!(webrank(&["rank", good.to_str().unwrap(), "--order", "1,1,2"]).status.code(), Some(1));
}

#[test]
fn analysis_errors_are_embedded() {
    // A 3-web has no basic invariants to be geodesic with.
    let out = webrank(&["geodesic", fixture("w3-par.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["status"], "error");
    assert!(r["errors"][0].as_str().unwrap().starts_with("geodesic"));
}

#[test]
fn seed_precedence() {
    let path = fixture("w4-par.toml");
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_webrank"));
        c.args(["curvature", path.to_str().unwrap()]);
        match env {
            Some(v) => c.env("WEBRANK_SEED", v),
            None => c.env_remove("WEBRANK_SEED"),
        };
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        let out = c.output().unwrap();
        json(&out)["config"]["seed"].as_u64().unwrap()
    };
    assert_eq!(run(Some("5"), None), 5);
    assert_eq!(run(Some("5"), Some("9")), 9);
    assert_eq!(run(None, Some("9")), 9);
}
