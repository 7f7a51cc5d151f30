mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fractura::cli::{main_with_args, EXIT_OK, EXIT_VALIDATION, EXIT_VERIFICATION};
use serde_json::Value;

use common::*;

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("fractura").chain(args.iter().copied()))
}

fn strip_path() -> String {
    scenarios_dir().join("strip_tearing.json").display().to_string()
}

fn read_json(p: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// Every file under `dir`, keyed by its relative path.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

#[test]
fn evolve_writes_one_row_per_step_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let code = run(&["evolve", "--scenario", &strip_path(), "--out", out.to_str().unwrap(), "--delta", "1/8,0.25"]);
    assert_eq!(code, EXIT_OK);
    for (tag, steps) in [("0.125", 9), ("0.25", 5)] {
        let csv = fs::read_to_string(out.join(format!("trace-{tag}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), steps + 1, "header plus N+1 rows");
        let trace = read_json(out.join(format!("trace-{tag}.json")));
        assert_eq!(trace["steps"].as_array().unwrap().len(), steps);
        assert_eq!(fs::read_dir(out.join(format!("snapshots-{tag}"))).unwrap().count(), steps);
    }
    let manifest = read_json(out.join("manifest.json"));
    assert_eq!(manifest["command"], "evolve");
    assert_eq!(manifest["exit_status"], 0);
    assert!(manifest["timings_ms"].is_object());
    let outputs: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.contains(&"trace-0.125.csv"));
}

#[test]
fn zero_ellipticity_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = read_json(strip_path());
    cfg["coefficient"]["scalar"]["alpha1"] = 0.into();
    let path = tmp.path().join("bad.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = tmp.path().join("out");
    let code = run(&["solve", "--scenario", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);
    let err = fractura::scenario::ScenarioConfig::load(&path)
        .unwrap()
        .build(tmp.path(), 1, None)
        .unwrap_err()
        .to_string();
    assert!(err.contains("alpha1"), "{err}");
}

#[test]
fn strict_verify_flags_the_non_monotone_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let trace = fixture("non_monotone_trace.json").display().to_string();
    let args = ["verify", "--scenario", &strip_path(), "--out", out.to_str().unwrap(), "--trace", &trace];
    assert_eq!(run(&args), EXIT_OK, "non-strict runs report but succeed");
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(run(&strict), EXIT_VERIFICATION);
    let report = read_json(out.join("verification.json"));
    assert_eq!(report["report"]["passed"], false);
    assert_eq!(read_json(out.join("manifest.json"))["exit_status"], EXIT_VERIFICATION);
}

#[test]
fn reproducible_runs_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("repro");
    let o = out.to_str().unwrap().to_string();
    let mut runs = Vec::new();
    for threads in ["1", "4"] {
        let code = run(&[
            "evolve", "--scenario", &strip_path(), "--out", &o, "--delta", "1/4,1/8", "--reproducible", "--threads", threads, "--seed", "9",
        ]);
        assert_eq!(code, EXIT_OK);
        let mut files = snapshot(&out);
        // the thread count is echoed in the manifest by design
        let manifest = files.remove(Path::new("manifest.json")).unwrap();
        let mut m: Value = serde_json::from_slice(&manifest).unwrap();
        assert!(m.get("timings_ms").is_none());
        assert_eq!(m["seed"], 9);
        m["run"]["threads"] = Value::Null;
        runs.push((files, m));
        fs::remove_dir_all(&out).unwrap();
    }
    assert!(runs[0].0.len() > 4);
    assert_eq!(runs[0].0, runs[1].0);
    assert_eq!(runs[0].1, runs[1].1);
}

#[test]
fn lsc_and_study_commands_produce_their_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let lsc = tmp.path().join("lsc");
    assert_eq!(run(&["lsc", "--out", lsc.to_str().unwrap(), "--family", "staircase", "--n-max", "16"]), EXIT_OK);
    let csv = fs::read_to_string(lsc.join("lsc-staircase-euclidean.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
    assert!(lsc.join("lsc-staircase-crystalline.csv").exists());
    let summary = read_json(lsc.join("lsc.json"));
    assert!(!summary["experiments"].as_array().unwrap().is_empty());

    let study = tmp.path().join("study");
    let code = run(&["study", "--scenario", &strip_path(), "--out", study.to_str().unwrap(), "--delta", "1/4,1/8", "--strategy", "greedy"]);
    assert_eq!(code, EXIT_OK);
    assert!(fs::read_to_string(study.join("study.csv")).unwrap().lines().count() > 2);
    assert!(read_json(study.join("study.json"))["study"].is_object());

    let solve = tmp.path().join("solve");
    assert_eq!(run(&["solve", "--scenario", &strip_path(), "--out", solve.to_str().unwrap(), "--time", "0.5"]), EXIT_OK);
    assert!(solve.join("solution.csv").exists() && solve.join("crack.svg").exists());
}

#[test]
fn bad_arguments_are_validation_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("x");
    let o = o.to_str().unwrap();
    assert_eq!(run(&["evolve", "--out", o]), EXIT_VALIDATION);
    assert_eq!(run(&["evolve", "--scenario", &strip_path(), "--out", o, "--delta", "1.5"]), EXIT_VALIDATION);
    assert_eq!(run(&["solve", "--scenario", &strip_path(), "--out", o, "--time", "2"]), EXIT_VALIDATION);
    assert_eq!(run(&["frobnicate"]), EXIT_VALIDATION);
}
