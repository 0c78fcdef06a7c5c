use std::path::Path;
use std::process::Command;

fn pianola(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pianola")).args(args).output().expect("binary runs")
}

#[test]
fn expand_prints_depth_four() {
    let out = pianola(&["expand", "--depth", "4"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ABAABABA");
}

#[test]
fn generate_is_deterministic_per_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        let out = pianola(&["generate", "--seed", "7", "--out", dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["symbols.txt", "score.json", "score.csv", "performance.json", "performance.mid", "constraints.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
}

#[test]
fn generate_accepts_presets() {
    let dir = tempfile::tempdir().unwrap();
    let preset = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets/depth_weighted.json");
    let out = pianola(&["generate", "--config", preset.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let symbols = std::fs::read_to_string(dir.path().join("symbols.txt")).unwrap();
    assert_eq!(symbols.lines().next().unwrap(), "ABAABABAABAABABAABABA");
}

#[test]
fn compensate_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(pianola(&["generate", "--seed", "3", "--out", d.to_str().unwrap()]).status.success());
    let score = d.join("score.json");
    let comp = d.join("comp.json");
    let out = pianola(&["compensate", "--in", score.to_str().unwrap(), "--model", "linear", "--out", comp.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = pianola(&["analyze", "--in", score.to_str().unwrap(), "--pair", comp.to_str().unwrap(), "--metrics", "mc,vss,lz"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out.stdout.is_empty());
}

#[test]
fn experiment_list_and_errors() {
    let out = pianola(&["experiment", "--list"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("fidelity"));
    assert_eq!(pianola(&["experiment", "--name", "no_such_thing"]).status.code(), Some(2));
    assert_eq!(pianola(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pianola(&["compensate", "--in", "/nonexistent.json", "--model", "linear", "--out", "/tmp/x.json"]).status.code(), Some(1));
}

#[test]
fn experiment_writes_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = pianola(&["experiment", "--name", "lsystem_info", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = pianola(&["report", "--dir", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("matrix.csv").exists());
}
