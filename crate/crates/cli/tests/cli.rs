use std::process::{Command, Output};

fn twistdesc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistdesc"))
        .args(args)
        .env_remove("TWISTDESC_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = twistdesc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn eval_examples() {
    assert_eq!(stdout(&["eval", "--r", "3", "--d", "3", "tau[c=3]^6"]), "1\n");
    assert_eq!(stdout(&["eval", "--r", "3", "--d", "3", "tau[c=2]^12"]), "80160\n");
    assert_eq!(stdout(&["eval", "--r", "2", "--d", "1", "tau[c=2]^2"]), "1\n");
}

#[test]
fn eval_warns_off_top_dimension() {
    let out = twistdesc(&["eval", "--r", "2", "--d", "1", "tau[c=2]"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "0\n");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not top-dimensional") && err.contains('2') && err.contains('3'), "{err}");
}

#[test]
fn eval_json() {
    let text = stdout(&["eval", "--r", "3", "--d", "3", "--format", "json", "tau[c=3]^5 tau[m=1,c=2]"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["value"]["num"], "1");
    assert_eq!(v["value"]["den"], "1");
    assert_eq!(v["top_dimensional"], true);
    assert_eq!(v["r"], 3);
}

#[test]
fn charnum_examples() {
    assert_eq!(stdout(&["charnum", "--r", "3", "--d", "3", "--points", "5", "--tangent-at-line", "1"]), "2\n");
    assert_eq!(stdout(&["charnum", "--r", "3", "--d", "3", "--points", "4", "--lines", "1", "--tangent-at-point", "1"]), "3\n");
    assert_eq!(stdout(&["charnum", "--r", "2", "--d", "1", "--points", "2"]), "1\n");
    assert_eq!(stdout(&["charnum", "--r", "2", "--d", "2", "--tangent", "0", "--tangent", "0", "--incidence", "2", "--incidence", "2", "--incidence", "2"]), "4\n");
}

#[test]
fn charnum_gate_failure() {
    let out = twistdesc(&["charnum", "--r", "3", "--d", "3", "--points", "4"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("8") && err.contains("12"), "{err}");
}

#[test]
fn table_rows() {
    let tsv = stdout(&["table", "planes-lines", "--format", "tsv"]);
    assert_eq!(tsv.lines().nth(1), Some("0\t80160\t38568\t17472\t7234\t2630\t805\t217"));
    let plain = stdout(&["table", "planes-points"]);
    let lines: Vec<&str> = plain.lines().collect();
    assert_eq!(lines.len(), 8);
    assert!(lines[1].starts_with("c=0  56960"));
    assert_eq!(lines[7].split_whitespace().collect::<Vec<_>>(), ["c=6", "1"]);
    let unknown = twistdesc(&["table", "planes-circles"]);
    assert!(!unknown.status.success());
}

#[test]
fn check_quick_passes() {
    let text = stdout(&["check", "quick"]);
    assert!(!text.contains("FAILED"), "{text}");
}

#[test]
fn parse_errors_exit_2() {
    let out = twistdesc(&["eval", "--r", "2", "--d", "0", "tau[x=1]"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 4"));
    let out = twistdesc(&["eval", "--r", "2", "--d", "0", "tau[u=1]"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.txt");
    let p = path.to_str().unwrap();
    let cold = stdout(&["--cache", p, "table", "tangency-mix", "--format", "tsv"]);
    let saved = std::fs::read_to_string(&path).unwrap();
    assert!(saved.starts_with("twistdesc-cache v1\n"));
    let warm = stdout(&["--cache", p, "table", "tangency-mix", "--format", "tsv"]);
    assert_eq!(cold, warm);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), saved);

    let json = stdout(&["--cache", p, "eval", "--r", "3", "--d", "3", "--format", "json", "tau[c=2]^12"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["value"]["num"], "80160");
    assert!(v["cache_hits"].as_u64().unwrap() >= 1);

    std::fs::write(&path, "not a cache\n").unwrap();
    let out = twistdesc(&["--cache", p, "eval", "--r", "2", "--d", "1", "tau[c=2]^2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn env_var_sets_cache() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env-cache.txt");
    let out = Command::new(env!("CARGO_BIN_EXE_twistdesc"))
        .args(["eval", "--r", "2", "--d", "2", "tau[c=2]^5"])
        .env("TWISTDESC_CACHE", &path)
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1\n");
    assert!(path.exists());
}
