mod common;

use std::process::{Command, Output};

use common::case_path;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclecert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn case(name: &str) -> String {
    case_path(name).display().to_string()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn certify_case9_exits_zero() {
    let out = run(&["certify", &case("case9.m"), "--recover-solution"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["certificate"]["verdict"]["status"], "certified");
    assert_eq!(v["config"]["command"], "certify");
    assert!(v["meta"]["timestamp"].is_u64());
    assert!(v["certificate"]["theta"]["theta"].is_array());
}

#[test]
fn topo_case14_reports_bridge_and_q() {
    let out = run(&["topo", &case("case14.m"), "--no-meta"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["bridges"], serde_json::json!([[7, 8]]));
    assert_eq!(v["q"], 7);
    assert!(v["dot"].as_str().unwrap().starts_with("digraph"));

    let text = run(&["topo", &case("case14.m"), "--format", "text"]);
    let s = String::from_utf8(text.stdout).unwrap();
    assert!(s.contains("bridges: 1\n  (7,8)"));
    assert!(s.contains("q: 7"));
}

#[test]
fn sweep_csv_row() {
    let out = run(&["sweep", &case("case9.m"), "--tol", "1e-3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8(out.stdout).unwrap();
    let mut rd = csv::Reader::from_reader(s.as_bytes());
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>(),
        ["case", "yCert", "yNR", "eta", "basisPolicy", "boxPolicy", "wallTime"]
    );
    let row = rd.records().next().unwrap().unwrap();
    assert_eq!(&row[0], "case9");
    let eta: f64 = row[3].parse().unwrap();
    assert!(eta >= 0.99);
}

#[test]
fn sweep_text_lists_cases_in_order() {
    let out = run(&["sweep", &case("case14.m"), &case("case9.m"), "--format", "text"]);
    let s = String::from_utf8(out.stdout).unwrap();
    let a = s.find("case14").unwrap();
    let b = s.find("case9 ").unwrap();
    assert!(a < b);
    assert!(s.contains("100.00%"));
}

#[test]
fn no_meta_reports_are_byte_identical() {
    for cmd in ["certify", "sweep", "topo", "nr"] {
        let args = [cmd, &case("case14.m"), "--no-meta", "--recover-solution"];
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "{cmd}");
        assert!(json(&a).get("meta").is_none());
    }
}

#[test]
fn inconclusive_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("overload.json");
    std::fs::write(
        &path,
        r#"{"buses":[{"id":1},{"id":2}],"branches":[{"from":1,"to":2,"x":0.5}],
            "injections":[{"id":1,"p":3.0},{"id":2,"p":-3.0}]}"#,
    )
    .unwrap();
    let p = path.display().to_string();
    let out = run(&["certify", &p]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["certificate"]["verdict"]["reason"], "bridge_overload");
    assert_eq!(run(&["nr", &p]).status.code(), Some(2));
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(run(&["certify", "/nonexistent/case.m"]).status.code(), Some(1));
    assert_eq!(run(&["certify", &case("case9.m"), "--box-scale-grid", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["certify", &case("case9.m"), "--slack-bus", "99"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.m");
    std::fs::write(&path, "mpc.baseMVA = 100;\nmpc.bus = [\n 1 3 0;\n];\nmpc.branch = [\n 1 99 0 0.1 0;\n];\n").unwrap();
    let out = run(&["topo", &path.display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown bus 99"));
}

#[test]
fn config_echo_covers_flags() {
    let out = run(&[
        "certify",
        &case("case9.m"),
        "--no-meta",
        "--basis-search",
        "roots",
        "--box-policy",
        "slack-share",
        "--box-scale-grid",
        "1,0.5",
        "--voltage",
        "case",
        "--seed",
        "4",
    ]);
    let v = json(&out);
    let c = &v["config"];
    assert_eq!(c["basis_search"]["mode"], "roots");
    assert_eq!(c["box_policy"], "slack-share");
    assert_eq!(c["box_scale_grid"], serde_json::json!([1.0, 0.5]));
    assert_eq!(c["lossless"]["voltage"], "case");
    assert_eq!(c["seed"], 4);
}
