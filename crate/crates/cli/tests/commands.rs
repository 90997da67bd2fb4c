use std::io::Write;
use std::process::{Command, Output};

use flowerflat::functions::paper_example_f;
use flowerflat::solve::{phi_of_gamma, OneFlowerFamily};
use flowerflat::{ExpandingMap, TrigPolynomial};
use serde_json::Value;
use tempfile::NamedTempFile;

fn config(json: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(json.as_bytes()).unwrap();
    f
}

fn run(args: &[&str], cfg: Option<&NamedTempFile>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_flowerflat"));
    cmd.args(args);
    if let Some(c) = cfg {
        cmd.arg("--config").arg(c.path());
    }
    cmd.output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

const PAPER_F: &str = r#"{"map":{"type":"linear","k":2},"function":{"type":"paper_example","gamma":0.1},"flower":{"petals":[[0.1,0.6]]}}"#;
const COS: &str = r#"{"function":{"type":"trig","cos":[1.0],"sin":[0.0],"const":0.0},"flower":{"petals":[[0.1,0.6]]}}"#;

#[test]
fn validate_accepts_semicircle() {
    let c = config(r#"{"flower":{"petals":[[0.1,0.6]]}}"#);
    let out = run(&["validate"], Some(&c));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["valid"], true);
}

#[test]
fn validate_rejects_overlapping_petals() {
    let c = config(r#"{"flower":{"petals":[[0.1,0.5],[0.4,0.7]]}}"#);
    let out = run(&["validate"], Some(&c));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("OverlappingPetals"));
}

#[test]
fn validate_rejects_paper_example_outside_range() {
    let c = config(r#"{"function":{"type":"paper_example","gamma":0.2},"flower":{"petals":[[0.2,0.7]]}}"#);
    assert_eq!(run(&["validate"], Some(&c)).status.code(), Some(2));
}

#[test]
fn unknown_config_field_is_invalid() {
    let c = config(r#"{"flowr":{}}"#);
    assert_eq!(run(&["validate"], Some(&c)).status.code(), Some(2));
}

#[test]
fn scan_rows_match_phi_of_gamma() {
    let c = config(COS);
    let out = run(&["scan", "--grid", "16", "--depth", "30"], Some(&c));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma,phi,error_bound"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 16);
    let family = OneFlowerFamily::new(ExpandingMap::linear(2).unwrap());
    let f = TrigPolynomial::shifted_cosine(0.0);
    for j in [1, 6, 13] {
        let b = phi_of_gamma(&family, &f, rows[j][0], 30).unwrap();
        assert_eq!(rows[j][0], j as f64 / 16.0);
        assert_eq!(rows[j][1], b.value);
        assert_eq!(rows[j][2], b.error_bound);
    }
}

#[test]
fn flatten_paper_example_is_flat_with_constant_zero() {
    let c = config(PAPER_F);
    let out = run(&["flatten"], Some(&c));
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["flat"], true);
    assert!(r["constant"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn flatten_cosine_on_wrong_flower_exits_3() {
    let c = config(COS);
    let out = run(&["flatten"], Some(&c));
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["flattenable"], false);
}

#[test]
fn flatten_constant_is_flat() {
    let c = config(r#"{"function":{"type":"trig","cos":[],"sin":[],"const":2.0},"flower":{"petals":[[0.3,0.8]]}}"#);
    let out = run(&["flatten"], Some(&c));
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["flat"], true);
    assert!((r["constant"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn solve_cosine_selects_three_quarters() {
    let c = config(COS);
    let out = run(&["solve"], Some(&c));
    assert!(out.status.success());
    let r = json(&out);
    let sel = r["selected"].as_u64().unwrap() as usize;
    let z = &r["zero_intervals"][sel];
    assert!(z["gamma_low"].as_f64().unwrap() <= 0.75 + 1e-9);
    assert!(z["gamma_high"].as_f64().unwrap() >= 0.75 - 1e-9);
    assert_eq!(r["sturmian"][sel]["periodic"][0], "0/1");
    assert_eq!(r["oracle"]["best_average"], 1.0);
}

#[test]
fn solve_without_sign_change_exits_4() {
    let c = config(r#"{"function":{"type":"trig","cos":[0.0],"sin":[1.0],"const":0.0}}"#);
    assert_eq!(run(&["solve", "--grid", "2"], Some(&c)).status.code(), Some(4));
}

#[test]
fn paper_notmax_reproduces_the_formula() {
    for (gamma, expected) in [("0.1", 0.125), ("0.05", 0.25 - 0.05 / 0.9)] {
        let out = run(&["paper-notmax", "--gamma", gamma], None);
        assert!(out.status.success());
        let r = json(&out);
        assert!((r["value_at_gamma_plus_3_4"].as_f64().unwrap() - expected).abs() <= 1e-10);
        assert_eq!(r["flat_on_F"], true);
        assert_eq!(r["normal_form_f"], true);
        assert_eq!(r["normal_form_f_plus_g"], false);
    }
    assert!(paper_example_f(0.2).is_err());
    assert_eq!(run(&["paper-notmax", "--gamma", "0.2"], None).status.code(), Some(2));
}

#[test]
fn rank_on_random_flower_is_p_plus_one() {
    let c = config(r#"{"map":{"type":"linear","k":3},"petals":3,"seed":7}"#);
    let out = run(&["rank"], Some(&c));
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["rank"].as_u64().unwrap(), r["p"].as_u64().unwrap() + 1);
}

#[test]
fn output_is_byte_identical_across_thread_counts() {
    let c = config(COS);
    let one = run(&["scan", "--grid", "64", "--threads", "1"], Some(&c));
    let four = run(&["scan", "--grid", "64", "--threads", "4"], Some(&c));
    assert_eq!(one.stdout, four.stdout);
    let a = run(&["solve", "--threads", "1"], Some(&c));
    let b = run(&["solve", "--threads", "3"], Some(&c));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_file() {
    let c = config(COS);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = run(&["scan", "--grid", "8", "--out", path.to_str().unwrap()], Some(&c));
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(path).unwrap().starts_with("gamma,phi,error_bound\n"));
}
