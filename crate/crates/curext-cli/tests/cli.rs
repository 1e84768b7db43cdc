use std::path::PathBuf;
use std::process::{Command, Output};

fn curext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curext")).args(args).output().expect("run curext")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("curext-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn list_prints_every_suite() {
    let out = curext(&["--list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for s in curext::suite::SUITES {
        assert!(text.lines().any(|l| l == *s), "missing {s}");
    }
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        &["--suite", "no-such-suite"][..],
        &["--suite", "degree", "--rank", "7"],
        &["--suite", "degree", "--grid", "4x4x8"],
        &["--suite", "degree", "--grid", "16x16"],
        &["--suite", "degree", "--tol", "degree=-1"],
        &["--unknown-flag"],
    ] {
        let out = curext(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bad_config_file_exits_with_two() {
    let p = scratch("bad.cfg");
    std::fs::write(&p, "suite = degree\nthis line has no equals sign\n").unwrap();
    let out = curext(&["--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = curext(&["--config", scratch("missing.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn passing_suite_writes_json_report() {
    let json = scratch("su2.json");
    let out = curext(&["--suite", "su2-vanishing", "--cases", "3", "--json", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("suite su2-vanishing: PASS"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["suite"], "su2-vanishing");
    assert_eq!(report["pass"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 4);
}

#[test]
fn failing_check_exits_with_one() {
    // the degree quadrature on a coarse grid cannot meet a 1e-9 tolerance
    let out = curext(&["--suite", "degree", "--grid", "8x8x16", "--tol", "degree=1e-9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL deg instanton"));
}

#[test]
fn flags_override_config_file() {
    let cfg = scratch("override.cfg");
    std::fs::write(&cfg, "# coarse degree run\nsuite = degree\ngrid = 8x8x16\ntol.degree = 1e-9\n").unwrap();
    let json = scratch("override.json");
    let out = curext(&["--config", cfg.to_str().unwrap(), "--tol", "degree=0.5", "--tol", "degree-additivity=0.5", "--json", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["config"]["grid"], serde_json::json!([8, 8, 16]));
}
