use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circle-kit"))
        .args(args)
        .env_remove("CIRCLEKIT_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn delta_table_matches() {
    let out = run(&["delta", "--k", "3..12"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rows = v["delta_table"].as_array().unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r["matches"] == true));
    assert_eq!(rows[0]["delta"], "19/60");
    assert_eq!(rows[4]["delta"], "457/4032");
}

#[test]
fn delta_formula_row() {
    let v = json(&run(&["delta", "--k", "20"]));
    // 1/22 + 1/15200
    assert_eq!(v["delta_table"][0]["delta"], "7611/167200");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["delta", "--k", "2"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--x", "abc"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["integral", "--which", "3"]).status.code(), Some(2));
}

#[test]
fn budget_exit_4() {
    let out = Command::new(env!("CARGO_BIN_EXE_circle-kit"))
        .args(["verify", "--x", "10000", "--method", "direct"])
        .env("CIRCLEKIT_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let bad = Command::new(env!("CARGO_BIN_EXE_circle-kit"))
        .args(["delta"])
        .env("CIRCLEKIT_BUDGET", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn report_schema() {
    let out = run(&[
        "verify", "--k", "3", "--x", "1,4", "--q-max", "10", "--B", "20",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        [
            "meta",
            "delta_table",
            "series",
            "integrals",
            "records",
            "diagnostics"
        ]
    );
    assert_eq!(v["meta"]["command"], "verify");
    assert_eq!(v["meta"]["flags"]["q_max"], 10);
    let records = v["records"].as_array().unwrap();
    assert_eq!(records[0]["exact"], 3);
    assert_eq!(records[0]["direct"], 3);
    assert_eq!(records[0]["convolution"], 3);
    assert_eq!(records[1]["exact"], 23);
    for r in records {
        for key in ["k", "x", "exact", "main", "residual", "normalized"] {
            assert!(r.get(key).is_some(), "record lacks {key}");
        }
    }
    let c = &v["integrals"]["main_term"][0];
    let (s1, j1) = (c["sigma1"].as_f64().unwrap(), c["j1"].as_f64().unwrap());
    assert!((c["c1"].as_f64().unwrap() - s1 * j1).abs() < 1e-9);
    // round trip
    let text = serde_json::to_string(&v).unwrap();
    let again: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(again, v);
}

#[test]
fn exact_at_one_for_each_method() {
    for m in ["direct", "conv", "both"] {
        let v = json(&run(&[
            "verify", "--x", "1", "--method", m, "--q-max", "5", "--B", "10",
        ]));
        assert_eq!(v["records"][0]["exact"], 3, "method {m}");
    }
}

#[test]
fn series_trivial_truncation() {
    let v = json(&run(&["series", "--k", "3", "--q-max", "1"]));
    assert_eq!(v["series"][0]["sigma1"], 1.0);
}

#[test]
fn integral_against_oracle() {
    let v = json(&run(&[
        "integral",
        "--k",
        "3",
        "--which",
        "1",
        "--B",
        "400",
        "--samples",
        "5",
    ]));
    let row = &v["integrals"]["values"][0];
    assert!(row["oracle_diff"].as_f64().unwrap() < 1e-3);
}

#[test]
fn hua_exact_count() {
    let v = json(&run(&[
        "diagnostics",
        "hua",
        "--k",
        "3",
        "--j",
        "2",
        "--y",
        "2",
    ]));
    assert_eq!(v["diagnostics"]["hua_k3"]["count"], "6");
}

#[test]
fn diagnostics_deterministic() {
    let args = [
        "diagnostics",
        "minor",
        "--k",
        "3",
        "--x",
        "10000",
        "--samples",
        "40",
        "--seed",
        "9",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let rows = json(&a)["diagnostics"]["minor_k3"]["rows"]
        .as_array()
        .unwrap()
        .len();
    assert_eq!(rows, 40);
}

#[test]
fn arcs_sweep_clean() {
    let out = run(&["diagnostics", "arcs", "--samples", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["diagnostics"]["arcs_k3"]["classify_failures"], 0);
}

#[test]
fn csv_tables_to_directory() {
    let dir = std::env::temp_dir().join(format!("circle-kit-test-{}", std::process::id()));
    let out = run(&[
        "sieve",
        "--x",
        "100,1000",
        "--format",
        "csv",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.join("sieve.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,n,sum_d,sum_d2,sum_d2_over_x_log3x"));
    assert_eq!(lines.count(), 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn csv_floats_have_twelve_digits() {
    let out = run(&["series", "--k", "3", "--q-max", "3", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    let mantissa = row[2].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 12);
}
