use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn graphon(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphon"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = graphon(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    graphon(dir, args).status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_er_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "er", "--p", "0.5", "--n", "8", "--out", "er.json"]);
    let doc = read_json(&dir.path().join("er.json"));
    assert_eq!(doc["kind"], "weighted");
    let beta = doc["beta"].as_array().unwrap();
    for (i, row) in beta.iter().enumerate() {
        for (j, v) in row.as_array().unwrap().iter().enumerate() {
            assert_eq!(v.as_f64().unwrap(), if i == j { 0.0 } else { 0.5 });
        }
    }
    let m = read_json(&dir.path().join("er.json.manifest.json"));
    assert_eq!(m["command"], "gen");
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn gen_ba_and_ws() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "ba", "--m0", "10", "--m", "10", "--n", "100", "--out", "ba.json"]);
    assert_eq!(read_json(&dir.path().join("ba.json"))["kind"], "dag");
    ok(dir.path(), &["gen", "ws", "--kappa", "0.4", "--p", "0.75", "--n", "32", "--out", "ws.json"]);
    ok(dir.path(), &["gen", "ws", "--kappa", "0.4", "--p", "0.75", "--n", "32", "--trials", "20", "--resolution", "8", "--out", "emp.json"]);
    let emp = read_json(&dir.path().join("emp.json"));
    assert_eq!(emp["n"], 32);
    assert_eq!(emp["beta"][0][1], emp["beta"][0][3]);
    assert_eq!(emp["beta"][0][0], 0.0);
}

#[test]
fn identical_files_are_at_distance_zero() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "ws", "--kappa", "0.4", "--p", "0.75", "--n", "10", "--out", "g.json"]);
    for mode in ["dbox", "dbox-exact", "dbox-heuristic", "dhat-exact", "dhat-heuristic", "overlay-optimize"] {
        if mode == "dhat-exact" {
            // 10 nodes exceed the default exhaustive permutation limit
            assert_eq!(code(dir.path(), &["distance", "g.json", "g.json", "--mode", mode]), 3);
            continue;
        }
        let out = ok(dir.path(), &["distance", "g.json", "g.json", "--mode", mode]);
        let r: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(r["value"].as_f64().unwrap(), 0.0, "{mode}");
    }
    ok(dir.path(), &["distance", "g.json", "g.json", "--mode", "dbox-exact", "--out", "d.json"]);
    let r = read_json(&dir.path().join("d.json"));
    assert_eq!((r["value"].as_f64().unwrap(), r["exact"].as_bool().unwrap()), (0.0, true));
    assert!(dir.path().join("d.json.manifest.json").exists());
}

#[test]
fn scale_reports_the_plan() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "ws", "--kappa", "0.4", "--p", "0.75", "--n", "11", "--out", "g.json"]);
    ok(d, &["scale", "--input", "g.json", "--N", "64", "--out", "big.json"]);
    let plan = read_json(&d.join("big.plan.json"));
    assert_eq!((plan["k"].as_u64(), plan["m"].as_u64()), (Some(5), Some(9)));
    assert_eq!(read_json(&d.join("big.json"))["n"], 64);
    ok(d, &["scale", "--input", "g.json", "--N", "33", "--method", "blowup", "--out", "b.json", "--plan", "b-plan.json"]);
    assert_eq!(read_json(&d.join("b-plan.json"))["bound"].as_f64(), Some(0.0));

    let out = graphon(d, &["scale", "--input", "g.json", "--N", "64", "--method", "blowup", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--method fractional"));
    assert_eq!(code(d, &["scale", "--input", "g.json", "--N", "64", "--method", "interpolate", "--out", "x.json"]), 3);
    assert_eq!(code(d, &["scale", "--input", "g.json", "--N", "5", "--out", "x.json"]), 3);
    // interpolation needs an upper-triangular input
    assert_eq!(code(d, &["scale", "--input", "g.json", "--N", "22", "--method", "interpolate", "--out", "x.json"]), 2);
    ok(d, &["gen", "ba", "--m0", "3", "--m", "2", "--n", "11", "--out", "dag.json"]);
    ok(d, &["scale", "--input", "dag.json", "--N", "22", "--method", "interpolate", "--out", "i.json"]);
}

#[test]
fn sample_writes_a_csv_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "er", "--p", "0.5", "--n", "8", "--out", "g.json"]);
    ok(d, &["sample", "--input", "g.json", "--trials", "200", "--out", "s.json", "--csv", "s.csv"]);
    let text = fs::read_to_string(d.join("s.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trial,edges,distance,threshold"));
    assert_eq!(lines.count(), 200);
    assert_eq!(read_json(&d.join("s.json")).as_array().unwrap().len(), 200);
    ok(d, &["sample", "--input", "g.json", "--N", "20", "--out", "one.json"]);
    assert_eq!(read_json(&d.join("one.json"))["n"], 20);
}

#[test]
fn concentration_sweeps_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["concentration", "--model", "er", "--p", "0.5", "--sizes", "8,12", "--trials", "30", "--out", "c.json", "--csv", "c.csv"]);
    let reports = read_json(&d.join("c.json"));
    assert_eq!(reports.as_array().unwrap().len(), 2);
    assert_eq!(reports[1]["violations"], 0);
    let text = fs::read_to_string(d.join("c.csv")).unwrap();
    assert!(text.starts_with("n,trial,distance,threshold\n"));
    assert_eq!(text.lines().count(), 61);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("task.json"), r#"{"task": {"train": 256, "val": 128}, "config": {"epochs": 8}}"#).unwrap();
    ok(d, &["gen", "ws", "--kappa", "0.4", "--p", "0.75", "--n", "12", "--out", "g.json"]);
    let runs: [&[&str]; 4] = [
        &["gen", "ba", "--m0", "4", "--m", "2", "--n", "30", "--out", "ba.json", "--seed", "7"],
        &["sample", "--input", "g.json", "--trials", "5", "--out", "s.json", "--csv", "s.csv", "--seed", "7"],
        &["concentration", "--input", "g.json", "--trials", "10", "--out", "c.json", "--seed", "7"],
        &["search", "--task", "task.json", "--out-dir", "run", "--seed", "7"],
    ];
    let files = ["ba.json", "ba.json.manifest.json", "s.json", "s.csv", "c.json", "run/trace.json", "run/graphon.json", "run/final_dag.json", "run/history.csv", "run/trace.json.manifest.json"];
    let snapshot = || -> Vec<Vec<u8>> { files.iter().map(|f| fs::read(d.join(f)).unwrap()).collect() };
    for args in runs {
        ok(d, args);
    }
    let first = snapshot();
    for args in runs {
        let mut with_threads = args.to_vec();
        with_threads.extend(["--threads", "1"]);
        ok(d, &with_threads);
    }
    assert_eq!(snapshot(), first);
}

#[test]
fn search_outputs_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("task.json"), r#"{"task": {"train": 256, "val": 128}}"#).unwrap();
    ok(d, &["search", "--task", "task.json", "--epochs", "8", "--out-dir", "run"]);
    let history = fs::read_to_string(d.join("run/history.csv")).unwrap();
    assert!(history.starts_with("epoch,loss,val_accuracy,tau\n"));
    assert_eq!(history.lines().count(), 9);
    let trace = read_json(&d.join("run/trace.json"));
    assert_eq!(trace["epochs_recorded"], 2);
    assert_eq!(read_json(&d.join("run/final_dag.json"))["kind"], "dag");
    assert_eq!(read_json(&d.join("run/graphon.json"))["n"], 8);

    fs::write(d.join("bad.json"), r#"{"config": {"epochs": 4, "lr": 1e9, "momentum": 0.99}}"#).unwrap();
    assert_eq!(code(d, &["search", "--task", "bad.json", "--out-dir", "bad"]), 4);
    fs::write(d.join("typo.json"), r#"{"tsk": {}}"#).unwrap();
    assert_eq!(code(d, &["search", "--task", "typo.json", "--out-dir", "typo"]), 2);
}

#[test]
fn validation_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(d, &["gen", "er", "--p", "1.5", "--n", "8", "--out", "x.json"]), 2);
    assert_eq!(code(d, &["gen", "ws", "--p", "0.5", "--n", "8", "--out", "x.json"]), 2);
    fs::write(d.join("bad.json"), r#"{"version":1,"kind":"weighted","n":2,"alpha":[0.6,0.6],"beta":[[0,1],[1,0]],"symmetric":true}"#).unwrap();
    let out = graphon(d, &["distance", "bad.json", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nodeweights sum"));
    fs::write(d.join("v2.json"), r#"{"version":2,"kind":"dag","n":1,"adj":[[0]]}"#).unwrap();
    assert_eq!(code(d, &["distance", "v2.json", "v2.json"]), 2);
}

#[test]
fn replay_checks_digests() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "er", "--p", "0.3", "--n", "6", "--out", "g.json"]);
    ok(d, &["sample", "--input", "g.json", "--trials", "3", "--out", "s.json", "--seed", "11"]);
    ok(d, &["replay", "s.json.manifest.json"]);

    let path = d.join("s.json.manifest.json");
    let tampered = fs::read_to_string(&path).unwrap().replace("\"seed\": 11", "\"seed\": 12");
    fs::write(&path, tampered).unwrap();
    assert_eq!(code(d, &["replay", "s.json.manifest.json"]), 1);
}
