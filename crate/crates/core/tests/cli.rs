use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linkmetric"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn linkmetric")
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn triangle_inputs(dir: &Path) -> (String, String) {
    let edges = write(dir, "tri.txt", "# triangle\n10 20\n20 30\n30 10\n");
    let attrs = write(dir, "tri_attrs.txt", "10 1\n20 2\n30 3\n");
    (edges, attrs)
}

#[test]
fn triangle_summary_values() {
    let dir = TempDir::new().unwrap();
    let (edges, attrs) = triangle_inputs(dir.path());
    let out = dir.path().join("out");
    let o = run(bin().args(["--edges", &edges, "--attrs", &attrs, "--oracle", "--analyze", "--out"]).arg(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["graph"]["n"], 3);
    assert_eq!(s["graph"]["m"], 3);
    assert_eq!(s["metric"], "tv");
    let close = |v: &Value, want: f64| assert!((num(v) - want).abs() < 1e-6, "{v} vs {want}");
    close(&s["alphas"]["alpha1"], 14.0 / 3.0);
    close(&s["alphas"]["alpha2"], 22.0 / 12.0);
    close(&s["alphas"]["alpha3"], 2.0);
    close(&s["metric_value"], 2.0);
    close(&s["oracle"]["metric_value"], 2.0);
    close(&s["delta1"], 1.5);
    assert_eq!(s["converged"], true);
    assert_eq!(s["stages"].as_array().unwrap().len(), 3);
    assert!(s["spectral"].is_array() || s["spectral"].is_object());
    for n in 1..=3 {
        let csv = fs::read_to_string(out.join(format!("stage{n}_trace.csv"))).unwrap();
        assert!(csv.starts_with("iteration,node_id,state\n"));
        assert!(csv.lines().nth(1).unwrap().starts_with("0,"));
    }
}

#[test]
fn missing_attribute_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let (edges, _) = triangle_inputs(dir.path());
    let attrs = write(dir.path(), "partial.txt", "10 1\n30 3\n");
    let o = run(bin().args(["--edges", &edges, "--attrs", &attrs, "--out"]).arg(dir.path().join("out")));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("20"), "stderr does not name the node: {err}");
}

#[test]
fn bad_arguments_exit_nonzero() {
    let dir = TempDir::new().unwrap();
    let (edges, attrs) = triangle_inputs(dir.path());
    let o = run(bin().args(["--edges", &edges, "--attrs", &attrs, "--metric", "poly", "--out"]).arg(dir.path()));
    assert_eq!(o.status.code(), Some(1));
    let o = run(bin().args(["--er", "50", "0.1", "--exp-mean", "2", "--out"]).arg(dir.path()));
    assert_eq!(o.status.code(), Some(1), "ER without a seed must be rejected");
}

#[test]
fn unstable_step_size_reports_nonconvergence() {
    let dir = TempDir::new().unwrap();
    let edges = write(dir.path(), "c6.txt", "0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n");
    let attrs = write(dir.path(), "c6_attrs.txt", "0 1\n1 4\n2 2\n3 8\n4 3\n5 5\n");
    let base = ["--edges", &edges, "--attrs", &attrs, "--eps-frac", "1.5", "--max-iters", "2000", "--out"];
    let o = run(bin().args(base).arg(dir.path().join("a")));
    assert_eq!(o.status.code(), Some(1), "unstable step without opt-in must be refused");
    let out = dir.path().join("b");
    let o = run(bin().args(base).arg(&out).arg("--allow-unstable-epsilon"));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["converged"], false);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let args = ["--er", "300", "0.02", "--seed", "42", "--exp-mean", "5", "--oracle", "--analyze", "--trace-every", "10"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(bin().args(args).arg("--out").arg(&a)).status.code(), Some(0));
    assert_eq!(run(bin().args(args).arg("--out").arg(&b).env("LINKMETRIC_THREADS", "1")).status.code(), Some(0));
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 4);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?} differs");
    }
}

#[test]
fn invalid_thread_cap_is_rejected() {
    let dir = TempDir::new().unwrap();
    let (edges, attrs) = triangle_inputs(dir.path());
    let o = run(bin().args(["--edges", &edges, "--attrs", &attrs, "--out"]).arg(dir.path().join("o")).env("LINKMETRIC_THREADS", "zero"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn polynomial_run_writes_per_term_traces() {
    let dir = TempDir::new().unwrap();
    let (edges, attrs) = triangle_inputs(dir.path());
    let spec = write(dir.path(), "spec.txt", "# l k c\n2 0 1\n1 1 -1\n");
    let out = dir.path().join("out");
    let o = run(bin().args(["--edges", &edges, "--attrs", &attrs, "--metric", "poly", "--spec", &spec, "--oracle", "--out"]).arg(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["term_2_0_stage1_trace.csv", "term_2_0_stage2_trace.csv", "term_1_1_stage1_trace.csv", "term_1_1_stage2_trace.csv"] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    // (y_i - y_j)^2 / 2 summed per edge and averaged: edges (1,2), (2,3), (3,1).
    let s = summary(&out);
    let want = (1.0 + 1.0 + 4.0) / 2.0 / 3.0;
    assert!((num(&s["metric_value"]) - want).abs() < 1e-6, "{}", s["metric_value"]);
    assert_eq!(s["metric"], "poly");
}

#[test]
fn shifted_run_is_written_alongside() {
    let dir = TempDir::new().unwrap();
    let (edges, attrs) = triangle_inputs(dir.path());
    let out = dir.path().join("out");
    let o = run(bin().args(["--edges", &edges, "--attrs", &attrs, "--shift", "7.5", "--out"]).arg(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    let sh = &s["shifted"];
    assert!((num(&sh["shift"]) - 7.5).abs() < 1e-15);
    assert!((num(&sh["metric_value"]) - num(&s["metric_value"])).abs() < 1e-6);
    assert!(out.join("shifted").join("stage1_trace.csv").exists());
}
