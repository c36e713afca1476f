use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pemkit::io::read_points;
use serde_json::Value;

fn pemkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pemkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", stderr(o));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write_dist(dir: &Path) -> String {
    let p = dir.join("dist.json");
    fs::write(&p, r#"{"mean": [1.0, 2.0], "std": [0.5, 2.0], "corr": [[1, 0.3], [0.3, 1]]}"#)
        .unwrap();
    p.display().to_string()
}

#[test]
fn qpem_points_file_has_one_row_per_point() {
    let o = pemkit(&["points", "--method", "qpem", "--dim", "10", "--r", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 201);
    let o = pemkit(&["points", "--method", "hpem", "--dim", "10"]);
    assert_eq!(stdout(&o).lines().count(), 1 + 21);
}

#[test]
fn points_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let o = pemkit(&["points", "--method", "sgh3", "--dim", "4", "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    let (set, w) = read_points(fs::File::open(&path).unwrap()).unwrap();
    let (set0, w0) = pemkit::propagate::Method::Sgh3.point_set(4).unwrap();
    assert_eq!(set.points, set0.points);
    assert_eq!(set.kinds, set0.kinds);
    assert_eq!(w, w0);
}

#[test]
fn invalid_parameters_exit_with_code_two() {
    let o = pemkit(&["points", "--method", "qpem", "--dim", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unsupported dimension"));
    let o = pemkit(&["points", "--method", "qpem", "--dim", "3", "--r", "1.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("r must exceed sqrt(2)"));
    let o = pemkit(&["points", "--method", "sgh3", "--dim", "3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pemkit(&["points", "--method", "sobol", "--dim", "3", "--skip", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn six_story_report_embeds_the_configuration() {
    let v = json(&pemkit(&["propagate", "--method", "qpem", "--case", "sixstory"]));
    assert_eq!(v["config"]["method"]["name"], "qpem");
    assert_eq!(v["config"]["method"]["r"], 3.0);
    assert_eq!(v["config"]["factor"], "cholesky");
    assert_eq!(v["point_count"], 649);
    let mean = v["summary"]["mean"].as_f64().unwrap();
    assert!((mean - 112.6266).abs() < 1e-3 * 112.6266);
    assert!(v["elapsed_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn check_mode_evaluates_the_mean_input() {
    let o = pemkit(&["propagate", "--method", "qpem", "--case", "elasticbar", "--check"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("5.000000"));
}

#[test]
fn constant_external_model_has_undefined_shape() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write_dist(dir.path());
    let o = pemkit(&[
        "propagate", "--method", "qpem", "--dist", &dist, "--", "sh", "-c",
        "while read l; do echo 7; done",
    ]);
    let v = json(&o);
    assert_eq!(v["summary"]["mean"], 7.0);
    assert_eq!(v["summary"]["std"], 0.0);
    assert!(v["summary"]["skew"].is_null() && v["summary"]["kurt"].is_null());
    assert_eq!(v["undefined"], serde_json::json!(["skew", "kurt"]));
}

#[test]
fn doubling_external_model_doubles_the_std() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write_dist(dir.path());
    let run = |script: &str, workers: &str| {
        json(&pemkit(&[
            "propagate", "--method", "hpem", "--dist", &dist, "--workers", workers, "--", "sh",
            "-c", script,
        ]))
    };
    let id = run("cut -d, -f1", "1");
    let twice = run("awk -F, '{ printf \"%.17g\\n\", 2 * $1 }'", "3");
    let (s1, s2) = (
        id["summary"]["std"].as_f64().unwrap(),
        twice["summary"]["std"].as_f64().unwrap(),
    );
    assert!((s1 - 0.5).abs() < 1e-12);
    assert!((s2 - 2.0 * s1).abs() < 1e-12);
}

#[test]
fn external_model_killed_mid_batch_names_missing_points() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write_dist(dir.path());
    let o = pemkit(&[
        "propagate", "--method", "qpem", "--dist", &dist, "--", "sh", "-c",
        "head -n 4 | cut -d, -f1; kill -9 $$",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("missing for points 4..9"), "{}", stderr(&o));
}

#[test]
fn benchmark_writes_wide_and_long_tables() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    let long = dir.path().join("l.csv");
    let o = pemkit(&[
        "benchmark", "--case", "rooftruss", "--table", table.to_str().unwrap(), "--long",
        long.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = fs::read_to_string(&table).unwrap();
    assert_eq!(t.lines().count(), 9);
    assert!(t.lines().last().unwrap().starts_with("rooftruss,6,qpem-3,73,"));
    assert_eq!(fs::read_to_string(&long).unwrap().lines().count(), 1 + 32);
}

#[test]
fn unknown_case_lists_the_available_ones() {
    let o = pemkit(&["benchmark", "--case", "bridge"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rooftruss"));
}

#[test]
fn reference_is_reproducible() {
    let args = ["reference", "--case", "sixstory", "--count", "2000", "--seed", "5"];
    let a = json(&pemkit(&args));
    let b = json(&pemkit(&args));
    assert_eq!(a, b);
    assert_eq!(a["count"], 2000);
}

#[test]
fn cases_are_listed() {
    let o = pemkit(&["cases"]);
    let text = stdout(&o);
    for name in ["polynomial", "rooftruss", "sixstory", "elasticbar"] {
        assert!(text.contains(name));
    }
}
