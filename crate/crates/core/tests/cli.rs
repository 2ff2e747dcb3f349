use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use twoassoc::two_assoc::enumerate_wn;
use twoassoc::RankedPoset;

fn run(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_twoassoc"));
    cmd.env_remove("TWOASSOC_CACHE_DIR");
    match cache {
        Some(dir) => {
            cmd.arg("--cache-dir").arg(dir);
        }
        None => {
            cmd.arg("--no-cache");
        }
    }
    cmd.args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn wn_json_round_trips() {
    for n in ["1,1", "2,1", "0,1,1"] {
        let out = run(&["wn", "enumerate", "--n", n, "--format", "json"], None);
        assert!(out.status.success());
        let back = RankedPoset::from_json(&stdout(&out)).unwrap();
        let w = enumerate_wn(&n.parse().unwrap()).unwrap();
        assert_eq!(back, w.poset, "n = {n}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["counts", "--n", "0,0"], None).status.code(), Some(2));
    let out = run(&["counts", "--n", "0,0"], None);
    assert!(String::from_utf8_lossy(&out.stderr).contains("n != 0"));
    assert_eq!(run(&["counts", "--n", "2,1", "--max-degree", "2"], None).status.code(), Some(2));
    assert_eq!(run(&["verify", "eulerian", "--n", "1,1"], None).status.code(), Some(0));
    assert_eq!(run(&["verify", "eulerian", "--r", "4"], None).status.code(), Some(0));
    assert_eq!(run(&["gf", "solve", "--tree", "((.", "--max-degree", "3"], None).status.code(), Some(2));
    assert_eq!(run(&["assoc", "enumerate", "--r", "0"], None).status.code(), Some(2));
    assert_eq!(run(&["wn", "enumerate", "--n", "3,2", "--max-faces", "10"], None).status.code(), Some(2));
}

#[test]
fn counts_table_agrees() {
    let out = run(&["counts", "--n", "1,1"], None);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("(..)  0  2           2        2       AGREE"), "{text}");
    assert!(!text.contains("DISAGREE"));
    let json = run(&["counts", "--n", "1,2", "--format", "json"], None);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(doc["agree"], true);
    assert!(doc["rows"][0]["series"].is_string());
}

#[test]
fn cd_index_values() {
    assert_eq!(stdout(&run(&["cd-index", "--r", "4"], None)), "c^2 + 3d\n");
    assert_eq!(stdout(&run(&["cd-index", "--n", "1,1"], None)), "c\n");
}

#[test]
fn outputs_are_stable_and_cache_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 4] = [
        &["counts", "--n", "2,1"],
        &["counts", "--n", "1,1,1", "--format", "json"],
        &["assoc", "enumerate", "--r", "5"],
        &["wn", "enumerate", "--n", "1,2", "--format", "dot"],
    ];
    for args in commands {
        let uncached = stdout(&run(args, None));
        let cold = stdout(&run(args, Some(dir.path())));
        let warm = stdout(&run(args, Some(dir.path())));
        assert_eq!(cold, uncached, "{args:?}");
        assert_eq!(warm, cold, "{args:?}");
    }
    let cache = fs::read_to_string(dir.path().join("counts.jsonl")).unwrap();
    assert!(cache.lines().any(|l| l.contains(r#""kind":"W""#)));
    assert!(cache.lines().any(|l| l.contains(r#""kind":"K""#)));

    // damage the file: a warning, same output
    fs::write(dir.path().join("counts.jsonl"), cache.clone() + "garbage\n").unwrap();
    let out = run(&["counts", "--n", "2,1"], Some(dir.path()));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ignoring corrupt cache line"));
    assert_eq!(stdout(&out), stdout(&run(&["counts", "--n", "2,1"], None)));
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_twoassoc"))
        .env("TWOASSOC_CACHE_DIR", dir.path())
        .args(["counts", "--n", "1,1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("counts.jsonl").exists());
}

#[test]
fn smoke_audit_passes_with_json() {
    let out = run(&["audit", "--profile", "smoke", "--format", "json"], None);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["summary"]["failed"], 0);
    assert!(doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["subset"] == "superlevel"));
}
