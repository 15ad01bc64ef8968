mod common;

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use serde_json::Value;

use common::*;

fn ranklabel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ranklabel")).args(args).output().unwrap()
}

fn cs() -> String {
    fixture_path("cs_departments.csv").display().to_string()
}

#[test]
fn label_writes_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("label.json");
    let res = ranklabel(&[
        "label", "--input", &cs(), "--weights", "PubCount=1.0,GRE=0.3", "--normalize", "minmax",
        "--sensitive", "DeptSizeBin", "--k", "10", "--format", "json", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(res.stdout.is_empty());
    let label = ranklabel::parse_label(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(label.metadata.k, 10);
    assert_eq!(label.diversity[0].topk.get("large"), Some(&1.0));
}

#[test]
fn label_html_to_stdout() {
    let res = ranklabel(&[
        "label", "--input", &cs(), "--weights", "PubCount=1", "--sensitive", "DeptSizeBin",
        "--diversity", "Region", "--format", "html",
    ]);
    assert_eq!(res.status.code(), Some(0));
    let html = String::from_utf8(res.stdout).unwrap();
    assert!(html.starts_with("<!DOCTYPE html>"));
    assert_eq!(html.matches("<section class=\"widget\"").count(), 6);
}

#[test]
fn default_format_is_json_and_p_is_recorded() {
    let res = ranklabel(&[
        "label", "--input", &cs(), "--weights", "Faculty=1", "--sensitive", "DeptSizeBin", "--p", "0.4",
        "--alpha", "0.1", "--k", "5",
    ]);
    assert_eq!(res.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["metadata"]["p_override"], 0.4);
    assert_eq!(v["metadata"]["alpha"], 0.1);
    assert_eq!(v["fairness"][0]["details"]["p"], 0.4);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["label", "--bogus"],
        vec!["label", "--input", "x.csv"],
        vec!["frobnicate"],
        vec!["label", "--input", "x.csv", "--weights", "a=1", "--sensitive", "g", "--format", "pdf"],
    ] {
        let res = ranklabel(&args);
        assert_eq!(res.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&res.stderr).contains("--help"), "{args:?}");
    }
}

fn data_error(args: &[&str], reason: &str) {
    let res = ranklabel(args);
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert_eq!(res.status.code(), Some(1), "{args:?}: {stderr}");
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("ranklabel: error["), "{stderr}");
    assert!(stderr.contains(reason), "{stderr}");
}

#[test]
fn data_errors_exit_one_with_reason() {
    let cs = cs();
    data_error(&["label", "--input", &cs, "--weights", "Nope=1", "--sensitive", "DeptSizeBin"], "unknown attribute");
    data_error(&["label", "--input", &cs, "--weights", "Region=1", "--sensitive", "DeptSizeBin"], "type_mismatch");
    data_error(&["label", "--input", &cs, "--weights", "GRE=1", "--sensitive", "Region"], "non_binary_attribute");
    data_error(&["label", "--input", &cs, "--weights", "GRE", "--sensitive", "DeptSizeBin"], "invalid_spec");
    data_error(&["label", "--input", &cs, "--weights", "GRE=1", "--sensitive", "DeptSizeBin", "--k", "0"], "invalid_argument");
    data_error(&["label", "--input", "/no/such/file.csv", "--weights", "GRE=1", "--sensitive", "g"], "error[io]");
}

#[test]
fn stats_reports_schema() {
    let res = ranklabel(&["stats", "--input", &cs()]);
    assert_eq!(res.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["row_count"], 100);
    assert_eq!(v["attributes"].as_array().unwrap().len(), 6);

    let res = ranklabel(&["stats", "--input", &cs(), "--attr", "GRE", "--bins", "4"]);
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    let gre = &v["attributes"][0];
    assert_eq!(gre["kind"], "numeric");
    assert_eq!(gre["histogram"]["counts"].as_array().unwrap().len(), 4);

    data_error(&["stats", "--input", &cs(), "--attr", "Nope"], "unknown attribute");
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut s = TcpStream::connect(("127.0.0.1", port)).ok()?;
    s.set_read_timeout(Some(Duration::from_secs(5))).ok()?;
    write!(s, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").ok()?;
    let mut buf = String::new();
    s.read_to_string(&mut buf).ok()?;
    Some(buf)
}

#[test]
fn serve_answers_http() {
    let dir = tempfile::tempdir().unwrap();
    let port = free_port();
    // port from the environment, data dir from the flag
    let mut child = Command::new(env!("CARGO_BIN_EXE_ranklabel"))
        .args(["serve", "--data-dir", dir.path().to_str().unwrap()])
        .env("RANKLABEL_PORT", port.to_string())
        .env("RUST_LOG", "warn")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();

    let start = Instant::now();
    let reply = loop {
        if let Some(r) = http_get(port, "/api/v1/rankings/0123456789abcdef/label") {
            break r;
        }
        assert!(start.elapsed() < Duration::from_secs(20), "service did not start");
        std::thread::sleep(Duration::from_millis(100));
    };
    child.kill().unwrap();
    child.wait().unwrap();

    assert!(reply.starts_with("HTTP/1.1 404"), "{reply}");
    assert!(reply.contains("\"error\":\"not_found\""), "{reply}");
    assert!(dir.path().join("datasets").is_dir());
}
