use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coherent")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn gram_reports_the_two_point_overlap() {
    let out = run(&["gram", "--labels", "[[0,0],[1,0]]"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "gram");
    assert_eq!(v["pass"], true);
    assert_eq!(v["input_hash"].as_str().unwrap().len(), 64);
    let mu = v["result"]["two_point"]["mu"].as_f64().unwrap();
    assert!((mu - (-0.5f64).exp()).abs() < 1e-15);
    let g01 = &v["result"]["g"]["entries"][0][1];
    assert!((g01[0].as_f64().unwrap() - mu).abs() < 1e-15);
}

#[test]
fn input_hash_depends_only_on_inputs() {
    let h = |l: &str| json(&run(&["gram", "--labels", l]))["input_hash"].clone();
    assert_eq!(h("[[0,0],[1,0]]"), h("[[0, 0], [1, 0]]"));
    assert_ne!(h("[[0,0],[1,0]]"), h("[[0,0],[2,0]]"));
}

#[test]
fn truth_table_csv_matches_the_printed_cnot_table() {
    let out = run(&["truth-table", "--gate", "cnot", "--R", "[[0,0],[1,0]]"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[4], "1,0,1,1");
    assert_eq!(rows[9], "2,1,2,3");
    assert_eq!(rows[15], "3,3,3,0");
}

#[test]
fn parse_errors_exit_2_and_name_the_field() {
    let out = run(&["gram", "--labels", "[[0,0],[1,\"x\"]]"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[1][1]"));

    let dup = run(&["projector", "--labels", "[[0,0],[0,0]]"]);
    assert_eq!(dup.status.code(), Some(2));

    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["resolution", "--grid", "12"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn failing_checks_exit_1() {
    // A tolerance of zero cannot be met by rounding-level residuals.
    let out = run(&["projector", "--labels", "[[0,0],[1,0.5]]", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn quantum_cnot_on_the_square_passes() {
    let out = run(&["cnot-quantum", "--target", "[[1.2,0],[0,1.2],[-1.2,0],[0,-1.2]]"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["result"]["dims"], serde_json::json!([4, 4]));
}

#[test]
fn degenerate_square_is_rejected() {
    let r = std::f64::consts::PI.sqrt();
    let sq = format!("[[{r},0],[0,{r}],[-{r},0],[0,-{r}]]");
    let out = run(&["cnot-quantum", "--labels", &sq, "--target", &sq]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn out_flag_writes_the_file() {
    let path = std::env::temp_dir().join(format!("coherent-cli-{}.json", std::process::id()));
    let out = run(&["contour", "--labels", "[[0,0],[1,1]]", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["kernel"]["terms"].as_array().unwrap().len(), 4);
    std::fs::remove_file(path).ok();
}
