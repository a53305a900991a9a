use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ccreduce::analysis::front_stats;
use tempfile::TempDir;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn ccreduce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccreduce")).args(args).output().unwrap()
}

fn run_into(out: &Path, extra: &[&str]) -> Output {
    let input = fixtures().join("routeAPacketTo_cache");
    let mut args = vec!["--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    ccreduce(&args)
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn header(path: &Path) -> Vec<String> {
    csv::Reader::from_path(path).unwrap().headers().unwrap().iter().map(String::from).collect()
}

#[test]
fn hybrid_writes_every_output() {
    let dir = TempDir::new().unwrap();
    let out = run_into(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sol = dir.path().join("solutions.csv");
    assert_eq!(header(&sol), ["EXTRACTIONS", "CC", "LOC", "extractions"]);
    let solutions = rows(&sol);
    assert_eq!(solutions.len(), 5);
    for r in &solutions {
        // The extraction count includes the method.
        let e: usize = r[0].parse().unwrap();
        assert_eq!(r[3].split(' ').count() + 1, e);
    }
    let pf = rows(&dir.path().join("pf_points.csv"));
    assert_eq!(pf.len(), 5);
    let pc = rows(&dir.path().join("parallel_coordinates.csv"));
    assert_eq!(pc.iter().map(|r| r[0].clone()).collect::<Vec<_>>(), ["s1", "s2", "s3", "s4", "s5"]);

    // Statistics recomputed from the streamed solutions agree with stats.csv.
    let points: Vec<Vec<i64>> = solutions.iter().map(|r| r[..3].iter().map(|x| x.parse().unwrap()).collect()).collect();
    let s = front_stats(&points).unwrap();
    let stats = rows(&dir.path().join("stats.csv"));
    assert_eq!(stats[0][0], "5");
    assert_eq!(stats[0][1], "true");
    assert_eq!(stats[0][2], s.reference.iter().map(i64::to_string).collect::<Vec<_>>().join(" "));
    assert_eq!(stats[0][4], format!("{:.4}", s.normalized_hv_f64()));
    assert_eq!(stats[0][5], s.per_objective[0].0.to_string());
}

#[test]
fn reruns_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(run_into(a.path(), &["--parallel"]).status.code(), Some(0));
    assert_eq!(run_into(b.path(), &[]).status.code(), Some(0));
    for f in ["solutions.csv", "pf_points.csv", "parallel_coordinates.csv", "stats.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn single_objective_run() {
    let dir = TempDir::new().unwrap();
    let out = run_into(dir.path(), &["--algorithm", "obtain-results", "--objectives", "1", "--order", "EXTRACTIONS"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let solutions = rows(&dir.path().join("solutions.csv"));
    assert_eq!(solutions.len(), 1);
    assert_eq!(solutions[0][0], "2");
}

#[test]
fn two_objective_algorithms_agree() {
    let order = ["--objectives", "2", "--order", "CC,LOC"];
    let mut fronts = Vec::new();
    for alg in ["epsilon-constraint", "hybrid-method"] {
        let dir = TempDir::new().unwrap();
        let mut args = vec!["--algorithm", alg];
        args.extend_from_slice(&order);
        assert_eq!(run_into(dir.path(), &args).status.code(), Some(0));
        fronts.push(rows(&dir.path().join("pf_points.csv")));
    }
    assert_eq!(fronts[0], fronts[1]);
}

#[test]
fn ast_input_is_enumerated() {
    let dir = TempDir::new().unwrap();
    let input = fixtures().join("routeAPacketTo.json");
    let out = ccreduce(&[
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().to_str().unwrap(),
        "--objectives",
        "2",
        "--order",
        "EXTRACTIONS,CC",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!rows(&dir.path().join("pf_points.csv")).is_empty());
}

#[test]
fn bad_invocations_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let out = run_into(dir.path(), &["--algorithm", "epsilon-constraint"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon-constraint requires exactly 2 objectives"));

    let out = run_into(dir.path(), &["--order", "E,CC,SIZE"]);
    assert_eq!(out.status.code(), Some(1));

    let out = ccreduce(&["--input", "/nonexistent/cache", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    assert_eq!(ccreduce(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(ccreduce(&["--help"]).status.code(), Some(0));
}

#[test]
fn too_low_threshold_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let out = run_into(dir.path(), &["--threshold", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn interrupted_run_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let out = run_into(dir.path(), &["--max-nodes", "50"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("front incomplete"));
    let stats = rows(&dir.path().join("stats.csv"));
    assert_eq!(stats[0][1], "false");
}
