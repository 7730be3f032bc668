use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_portfolio-admm"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/solve-result.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Checks the keywords the published schema uses: type, enum, required,
/// properties, additionalProperties, items, minItems, minimum and
/// exclusiveMinimum.
fn check_schema(value: &Value, schema: &Value, at: &str) -> Result<(), String> {
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            return Err(format!("{at}: {value} not in {options:?}"));
        }
    }
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "boolean" => value.is_boolean(),
            "number" => value.is_number(),
            "integer" => value.is_u64() || value.is_i64(),
            other => return Err(format!("{at}: unsupported type {other}")),
        };
        if !ok {
            return Err(format!("{at}: expected {ty}, got {value}"));
        }
    }
    if let Some(x) = value.as_f64() {
        if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
            if x < min {
                return Err(format!("{at}: {x} < {min}"));
            }
        }
        if let Some(min) = schema.get("exclusiveMinimum").and_then(Value::as_f64) {
            if x <= min {
                return Err(format!("{at}: {x} <= {min}"));
            }
        }
    }
    if let Some(obj) = value.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            let key = key.as_str().unwrap();
            if !obj.contains_key(key) {
                return Err(format!("{at}: missing {key}"));
            }
        }
        for (key, v) in obj {
            match props.and_then(|p| p.get(key)) {
                Some(sub) => check_schema(v, sub, &format!("{at}.{key}"))?,
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("{at}: unexpected key {key}"))
                }
                None => {}
            }
        }
    }
    if let Some(items) = value.as_array() {
        if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < min {
                return Err(format!("{at}: fewer than {min} items"));
            }
        }
        if let Some(sub) = schema.get("items") {
            for (i, v) in items.iter().enumerate() {
                check_schema(v, sub, &format!("{at}[{i}]"))?;
            }
        }
    }
    Ok(())
}

fn solve_json(args: &[&str]) -> (Value, i32) {
    let mut full = vec!["solve"];
    full.extend_from_slice(args);
    let out = run(&full);
    let code = out.status.code().unwrap();
    let v: Value = serde_json::from_str(&stdout(&out)).expect("solve prints JSON");
    check_schema(&v, &schema(), "$").unwrap();
    (v, code)
}

#[test]
fn gen_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = run(&["gen", "--assets", "10", "--periods", "200", "--seed", "7", "-o", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 201);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn gen_rejects_one_asset() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.csv");
    let out = run(&["gen", "--assets", "1", "--periods", "10", "-o", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("assets"));
}

#[test]
fn gen_reports_unwritable_path() {
    let out = run(&["gen", "-o", "/nonexistent-dir/r.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/r.csv"));
}

#[test]
fn gen_with_condition_number() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.csv");
    let out = run(&["gen", "--assets", "5", "--periods", "50", "--condition", "1e4", "-o", p.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 51);
}

#[test]
fn two_asset_fixture_is_pinned_for_every_strategy() {
    let input = fixture("two_assets.csv");
    for strategy in ["fixed", "rb", "bb", "rbb"] {
        let (v, code) = solve_json(&["--input", input.to_str().unwrap(), "--target-return", "0.02", "--strategy", strategy]);
        assert_eq!(code, 0);
        assert_eq!(v["termination"], "converged");
        let w: Vec<f64> = v["weights"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert!((w[0] - 0.5).abs() < 1e-10 && (w[1] - 0.5).abs() < 1e-10, "{strategy}: {w:?}");
    }
}

#[test]
fn auto_lambda_uses_sample_shape() {
    let input = fixture("illcond.csv");
    let (v, _) = solve_json(&["--input", input.to_str().unwrap(), "--target-return", "0.011", "--lambda", "auto"]);
    assert_eq!(v["lambda_initial"].as_f64().unwrap(), 1.0 / 2000.0);
    assert_eq!(v["config_echo"]["lambda_mode"], "auto-initial");
}

#[test]
fn illcond_fixture_regression() {
    let input = fixture("illcond.csv");
    let mut iterations = Vec::new();
    for strategy in ["fixed", "rb", "rbb"] {
        let (v, code) = solve_json(&[
            "--input",
            input.to_str().unwrap(),
            "--target-return",
            "0.011",
            "--strategy",
            strategy,
            "--history",
        ]);
        let its = v["iterations"].as_u64().unwrap();
        assert_eq!(v["history"]["r_norm"].as_array().unwrap().len() as u64, its);
        assert_eq!(code, if v["termination"] == "converged" { 0 } else { 3 });
        iterations.push(its);
    }
    // computed once on the committed fixture
    assert_eq!(iterations[0], 5000);
    assert_eq!(iterations[1], 940);
    assert!(iterations[0] >= iterations[1]);
    assert!(iterations[2] < iterations[1]);
}

#[test]
fn non_convergence_exits_with_three() {
    let input = fixture("illcond.csv");
    let (v, code) = solve_json(&["--input", input.to_str().unwrap(), "--target-return", "0.011", "--strategy", "fixed", "--max-iter", "10"]);
    assert_eq!(code, 3);
    assert_eq!(v["termination"], "max_iter");
}

#[test]
fn input_errors_exit_with_two_and_name_the_flag() {
    let input = fixture("illcond.csv");
    let cases: [(&[&str], &str); 4] = [
        (&["--input", "/missing.csv", "--target-return", "0.01"], "--input"),
        (&["--input", input.to_str().unwrap(), "--target-return", "5"], "--target-return"),
        (&["--input", input.to_str().unwrap(), "--target-return", "0.011", "--tol", "0"], "tol"),
        (&["--input", input.to_str().unwrap(), "--target-return", "0.011", "--lambda", "0", "--adaptive-lambda"], "--adaptive-lambda"),
    ];
    for (args, needle) in cases {
        let mut full = vec!["solve"];
        full.extend_from_slice(args);
        let out = run(&full);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{needle} not in {err}");
    }
    let out = run(&["solve", "--input", "x.csv", "--target-return", "0.1", "--strategy", "newton"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_csv_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "A,B\n0.1,0.2\n0.3,oops\n").unwrap();
    let out = run(&["solve", "--input", p.to_str().unwrap(), "--target-return", "0.2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn solve_output_is_byte_identical() {
    let input = fixture("illcond.csv");
    let args = ["solve", "--input", input.to_str().unwrap(), "--target-return", "0.011", "--history", "--adaptive-lambda"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn seed_independent_flag_changes_nothing() {
    let input = fixture("illcond.csv");
    let base = ["solve", "--input", input.to_str().unwrap(), "--target-return", "0.011"];
    let mut flagged = base.to_vec();
    flagged.push("--seed-independent");
    assert_eq!(run(&base).stdout, run(&flagged).stdout);
}

#[test]
fn output_file_matches_stdout() {
    let input = fixture("two_assets.csv");
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("out.json");
    let base = ["solve", "--input", input.to_str().unwrap(), "--target-return", "0.02"];
    let printed = run(&base).stdout;
    let mut with_file = base.to_vec();
    with_file.extend(["-o", p.to_str().unwrap()]);
    assert!(run(&with_file).status.success());
    assert_eq!(std::fs::read(&p).unwrap(), printed);
}

fn frontier_rows(args: &[&str]) -> Vec<Vec<String>> {
    let mut full = vec!["frontier"];
    full.extend_from_slice(args);
    let out = run(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "e,risk,l1_norm,nonzeros,shorts,iterations,status");
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn frontier_single_point() {
    let input = fixture("illcond.csv");
    let rows = frontier_rows(&["--input", input.to_str().unwrap(), "--points", "1"]);
    assert_eq!(rows.len(), 1);
    assert!(rows[0][1].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn frontier_rows_are_sorted_with_unit_l1_bound() {
    let input = fixture("illcond.csv");
    let rows = frontier_rows(&["--input", input.to_str().unwrap(), "--points", "9", "--strategy", "bb"]);
    assert_eq!(rows.len(), 9);
    let e: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(e.windows(2).all(|w| w[0] < w[1]));
    for r in &rows {
        assert!(r[2].parse::<f64>().unwrap() >= 1.0 - 1e-9);
        assert_eq!(r[6], "converged");
    }
}

#[test]
fn frontier_records_failed_points() {
    let input = fixture("two_assets.csv");
    let rows = frontier_rows(&["--input", input.to_str().unwrap(), "--points", "3", "--e-min", "0.015", "--e-max", "0.5"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][6], "converged");
    assert!(rows[1][6].trim_start_matches('"').starts_with("error: target return"));
    assert!(rows[2][1].is_empty());
}

fn bench_text(args: &[&str]) -> String {
    let mut full = vec!["bench"];
    full.extend_from_slice(args);
    let out = run(&full);
    assert!(out.status.success());
    stdout(&out)
}

fn without_wall_time(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(6);
            f.join(",")
        })
        .collect()
}

#[test]
fn bench_rows_and_summary() {
    let text = bench_text(&["--suite", "random", "--trials", "1", "--seed", "3"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "suite,strategy,trial,iterations,r_norm,d_norm,wall_ms,termination");
    assert_eq!(lines.len(), 1 + 4 + 4);
    let strategies: Vec<&str> = lines[1..5].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(strategies, ["fixed", "rb", "bb", "rbb"]);
    assert!(lines[5..].iter().all(|l| l.split(',').nth(2) == Some("median")));
}

#[test]
fn bench_is_deterministic_apart_from_wall_time() {
    let args = ["--suite", "illcond", "--trials", "2", "--seed", "11"];
    assert_eq!(without_wall_time(&bench_text(&args)), without_wall_time(&bench_text(&args)));
}

#[test]
fn help_documents_defaults() {
    let out = run(&["solve", "--help"]);
    let text = stdout(&out);
    for needle in ["[default: rbb]", "[default: auto]", "[default: 0.000001]", "[default: 5000]"] {
        assert!(text.contains(needle), "{needle}");
    }
}
