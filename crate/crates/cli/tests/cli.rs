use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matchable"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn eight_is_not_matchable() {
    let o = run(&["8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "not matchable (Prop 2.1: p=2, τ=4, r=0)");
    assert!(stdout(&run(&["decide", "30"])).starts_with("matchable"));
}

#[test]
fn match_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    for (n, partition) in [("30030", true), ("1323551250", true), ("360", false), ("16", false)] {
        let cert = dir.path().join(format!("{n}.json"));
        let mut args = vec!["match", n, "--out", path(&cert)];
        if partition {
            args.push("--via-partition");
        }
        assert_eq!(run(&args).status.code(), Some(0), "match {n}");
        let o = run(&["verify-cert", path(&cert)]);
        assert_eq!(o.status.code(), Some(0), "verify {n}");
        assert!(stdout(&o).starts_with("valid"));
    }
}

#[test]
fn tampered_certificate_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    assert!(run(&["match", "30030", "--via-partition", "--out", path(&cert)])
        .status
        .success());
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let pairs = v["pairs"].as_array_mut().unwrap();
    let target = pairs[0][1].clone();
    pairs[1][1] = target;
    std::fs::write(&cert, v.to_string()).unwrap();
    let o = run(&["verify-cert", path(&cert)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pair"));
}

#[test]
fn decision_and_strong_certificates() {
    let dir = tempfile::tempdir().unwrap();
    for (args, file) in [(["decide", "12"], "d.json"), (["strong", "4"], "s.json")] {
        let cert = dir.path().join(file);
        let mut a = args.to_vec();
        a.extend(["--out", path(&cert)]);
        assert!(run(&a).status.success());
        assert!(run(&["verify-cert", path(&cert)]).status.success());
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["0"]).status.code(), Some(2));
    assert_eq!(run(&["verify-cert", "/nonexistent/cert.json"]).status.code(), Some(2));
    assert_eq!(run(&["mp", "17"]).status.code(), Some(3));
    assert_eq!(run(&["replay-few", "--ell", "45"]).status.code(), Some(2));
    assert_eq!(run(&["replay-sqfr", "--ell", "40..50"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"certificate\": \"matching\"}").unwrap();
    assert_eq!(run(&["verify-cert", path(&junk)]).status.code(), Some(2));
}

#[test]
fn alpha_digits() {
    let o = run(&["alpha", "--digits", "14"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("0.72199023441955"));
    assert!(out.contains("tail bound"));
}

#[test]
fn census_output() {
    let o = run(&["census", "--ell", "24", "--mode", "odd"]);
    assert_eq!(
        stdout(&o),
        "ell,omega_max,c0,c1,c2,c3,c4,c5,c6,c_ge7\n24,7,4035965,6363543,4225826,1666753,396604,75606,12689,230\n"
    );
    let o = run(&["gcds", "--ell", "24", "--mode", "odd", "--d", "15,3"]);
    assert_eq!(stdout(&o), "d,count\n15,504881\n3,2019785\nx3,6334949\n");
}

#[test]
fn replay_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "replay-few",
        "--ell",
        "24",
        "--mode",
        "odd",
        "--explain",
        "--out-dir",
        path(dir.path()),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("12,741,251 < 14,680,064"));
    let cert = dir.path().join("few-odd-24.json");
    assert!(run(&["verify-cert", path(&cert)]).status.success());

    let o = run(&["replay-sqfr", "--ell", "45..46", "--out-dir", path(dir.path())]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("2 of 2 verified"));
    assert!(run(&["verify-cert", path(&dir.path().join("sqfr-46.json"))])
        .status
        .success());
}
