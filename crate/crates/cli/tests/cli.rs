use std::process::{Command, Output};

use serde_json::Value;

fn mathieu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mathieu")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn spectrum_csv_for_q3() {
    let o = mathieu(&["spectrum", "-p", "2", "-q", "3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut tables = text.split("\n\n");
    let bands: Vec<&str> = tables.next().unwrap().lines().collect();
    let gaps: Vec<&str> = tables.next().unwrap().lines().collect();
    assert_eq!(bands[0], "p,q,j,lambda,eta,mu,w,w_prime,ell");
    assert_eq!(bands.len(), 4);
    assert_eq!(gaps[0], "p,q,j,left,right,delta");
    assert_eq!(gaps.len(), 3);
    // the central band of 2/3 is [1 - sqrt 3, sqrt 3 - 1]
    let central: Vec<&str> = bands[2].split(',').collect();
    let w: f64 = central[6].parse().unwrap();
    assert!((w - (3f64.sqrt() - 1.0)).abs() < 1e-12);
}

#[test]
fn gaps_only_table() {
    let o = mathieu(&["gaps", "-p", "1", "-q", "5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn lemma2_equality_at_q1() {
    let o = mathieu(&["verify", "--suite", "lemma2", "-p", "1", "-q", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["pass"], Value::Bool(true));
    let checks = v["report"]["checks"].as_array().unwrap();
    let central = checks.iter().find(|c| c["name"] == "lemma2.central_width").unwrap();
    assert_eq!(central["equality"], Value::Bool(true));
}

#[test]
fn malformed_arguments_exit_with_2() {
    assert_eq!(mathieu(&["spectrum", "-p", "x", "-q", "3"]).status.code(), Some(2));
    assert_eq!(mathieu(&["nonsense"]).status.code(), Some(2));
    assert_eq!(mathieu(&["spectrum", "-q", "3"]).status.code(), Some(2));
    assert_eq!(mathieu(&["spectrum", "-p", "1", "-q", "3", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(mathieu(&["cf", "-p", "1"]).status.code(), Some(2));
}

#[test]
fn computational_errors_exit_with_1_and_json() {
    for args in [
        &["spectrum", "-p", "1", "-q", "4"][..],
        &["spectrum", "-p", "2", "-q", "6"][..],
        &["verify", "--suite", "lemma2", "-p", "2", "-q", "5"][..],
        &["recursion", "-cf", "2,2", "-k", "0"][..],
    ] {
        let o = mathieu(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let diag: Value = serde_json::from_slice(&o.stderr).unwrap();
        assert!(diag["error"].is_string() && diag["message"].is_string());
    }
}

#[test]
fn even_q_rows_are_sampled_and_marked() {
    let o = mathieu(&["butterfly", "--qmax", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    for q in 1..=5 {
        let qs = q.to_string();
        let marks: Vec<&str> = rows.iter().filter(|r| r[1] == qs).map(|r| r[5]).collect();
        assert!(!marks.is_empty());
        let expected = if q % 2 == 0 { "unsupported" } else { "signed" };
        assert!(marks.iter().all(|m| *m == expected), "q = {q}");
    }
}

#[test]
fn output_is_independent_of_job_count() {
    let a = mathieu(&["butterfly", "--qmax", "12", "--jobs", "1"]);
    let b = mathieu(&["butterfly", "--qmax", "12", "--jobs", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let a = mathieu(&["verify", "--suite", "all", "--qmax", "15", "--jobs", "1"]);
    let b = mathieu(&["verify", "--suite", "all", "--qmax", "15", "--jobs", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_floats_have_17_digits() {
    let o = mathieu(&["sigma", "-p", "1", "-q", "5", "-E", "0.5"]);
    let text = stdout(&o);
    let value = text.split("\"energy\":").nth(1).unwrap().split(',').next().unwrap();
    assert_eq!(value, "5.0000000000000000e-1");
    let v = json(&o);
    assert!((v["sigma_prime0"]["value"].as_f64().unwrap() + 11.909830056250525).abs() < 1e-12);
}

#[test]
fn cf_accepts_single_dash_spelling() {
    let o = mathieu(&["cf", "-cf", "1,2,100"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["value"]["num"], 201);
    assert_eq!(v["value"]["den"], 301);
    assert_eq!(v["parity"], Value::Bool(true));
    let same = mathieu(&["cf", "-p", "201", "-q", "301"]);
    assert_eq!(same.stdout, o.stdout);
}

#[test]
fn sums_and_recursion_reports() {
    let v = json(&mathieu(&["sums", "-p", "2", "-q", "7", "-k", "2"]));
    assert_eq!(v["kernel"].as_array().unwrap().len(), 6);
    assert!(v["log_term_discrepancy"].as_f64().unwrap() < 1e-8);
    assert!((v["kernel_total"].as_f64().unwrap() - 6.0).abs() < 1e-9);
    let v = json(&mathieu(&["recursion", "-cf", "1,2,4", "-k", "3"]));
    assert!(v["residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["trace"]["levels"].as_array().unwrap().len(), 3);
}

#[test]
fn theorem4_reporter_for_rapid_growth() {
    let o = mathieu(&["verify", "--suite", "thm4", "-cf", "1,2,100"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let level2 = &v["levels"][1];
    assert_eq!(level2["n"], 2);
    assert_eq!(level2["containment"]["contained"], Value::Bool(true));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bands.json");
    let o = mathieu(&["spectrum", "-p", "1", "-q", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["bands"].as_array().unwrap().len(), 3);
}
