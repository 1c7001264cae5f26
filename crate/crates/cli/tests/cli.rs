//! End-to-end runs of the binary: artifact formats, pipeline composition,
//! and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_covlap")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap().to_string();
    full.push("--out");
    let full_owned: Vec<String> =
        full.iter().map(|s| s.to_string()).chain([out_str.clone()]).collect();
    let status = Command::new(bin()).args(&full_owned).status().expect("binary runs");
    assert!(status.success(), "command {args:?} failed");
    out
}

#[test]
fn surface_make_emits_exact_fields() {
    let out = run(&["surface", "make", "--kind", "cycle", "--params", "12"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["vertices"], 12);
    assert_eq!(v["edges"].as_array().unwrap().len(), 12);
    assert!(v["faces"].as_array().unwrap().is_empty());
    assert_eq!(v["mass"].as_array().unwrap().len(), 12);
    assert!(v["infinity_edges"].as_array().unwrap().is_empty());
    assert_eq!(v["schema_version"], "1");
    assert!(v["config_hash"].is_string());
    assert!(v["seed"].is_number());
}

#[test]
fn deterministic_output_bytes() {
    let a = run(&["surface", "make", "--kind", "grid_torus", "--params", "6,6"]);
    let b = run(&["surface", "make", "--kind", "grid_torus", "--params", "6,6"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["surface", "make", "--kind", "dodecahedron", "--params", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["surface", "make"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn full_pipeline_circle_numberg() {
    let dir = tempfile::tempdir().unwrap();
    let base = run_to(dir.path(), "c12.json", &["surface", "make", "--kind", "cycle", "--params", "12"]);
    let plan = run_to(
        dir.path(),
        "plan.json",
        &["nodal", "plan", "--complex", base.to_str().unwrap(), "--degree", "2"],
    );
    // Extract the embedded cover spec into its own file.
    let plan_doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    assert_eq!(plan_doc["degree"], 2);
    assert_eq!(plan_doc["predicted_extra"], 1);
    let spec_path = dir.path().join("double.json");
    std::fs::write(&spec_path, serde_json::to_string(&plan_doc["cover"]).unwrap()).unwrap();

    let out = run(&[
        "stab",
        "numberg",
        "--base",
        base.to_str().unwrap(),
        "--cover",
        spec_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ledger: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(ledger["claimed"], 3);
    assert_eq!(ledger["observed"], 3);
    assert_eq!(ledger["holds"], true);

    let out = run(&[
        "stab",
        "verdict",
        "--base",
        base.to_str().unwrap(),
        "--cover",
        spec_path.to_str().unwrap(),
        "--target",
        "lambda1",
    ]);
    assert!(out.status.success());
    let verdict: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(verdict["verdict"], "strictly-unstable");
    assert_eq!(verdict["n_cover_open"], 3);
}

#[test]
fn degree_one_cover_verdict_stable() {
    let dir = tempfile::tempdir().unwrap();
    let base = run_to(dir.path(), "c.json", &["surface", "make", "--kind", "cycle", "--params", "8"]);
    // Identity cover spec of degree 1: tree = first 7 edges, voltage [1] on
    // the closing edge.
    let spec = serde_json::json!({
        "degree": 1,
        "tree": (0..7).collect::<Vec<usize>>(),
        "voltages": {"7": [1]}
    });
    let spec_path = dir.path().join("id.json");
    std::fs::write(&spec_path, serde_json::to_string(&spec).unwrap()).unwrap();
    let out = run(&[
        "stab",
        "verdict",
        "--base",
        base.to_str().unwrap(),
        "--cover",
        spec_path.to_str().unwrap(),
        "--target",
        "lambda1",
    ]);
    assert!(out.status.success());
    let verdict: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(verdict["verdict"], "i-stable");
}

#[test]
fn spec_compute_csv_has_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let base =
        run_to(dir.path(), "c.json", &["surface", "make", "--kind", "cycle", "--params", "12"]);
    let out = run(&[
        "spec", "compute", "--complex", base.to_str().unwrap(), "--m", "4", "--tol", "1e-10",
        "--seed", "7",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,eigenvalue,cluster,residual");
    assert_eq!(lines.len(), 5);
    // The lambda_1 pair shares a cluster id.
    let cluster = |line: &str| line.split(',').nth(2).unwrap().to_string();
    assert_eq!(cluster(lines[2]), cluster(lines[3]));
    assert_ne!(cluster(lines[1]), cluster(lines[2]));
}

#[test]
fn group_enum_and_mu() {
    let dir = tempfile::tempdir().unwrap();
    let pres = dir.path().join("f2.json");
    std::fs::write(&pres, "{\"rank\": 2, \"relators\": []}").unwrap();
    let out = run(&["group", "enum", "--presentation", pres.to_str().unwrap(), "--index", "3"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["count"], 13);

    let out = run(&["group", "mu", "--abelian", "2,4"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["mu"], 2);
}

#[test]
fn cover_components_match_orbits() {
    let dir = tempfile::tempdir().unwrap();
    let base =
        run_to(dir.path(), "c.json", &["surface", "make", "--kind", "cycle", "--params", "12"]);
    let plan = run_to(
        dir.path(),
        "plan.json",
        &["nodal", "plan", "--complex", base.to_str().unwrap(), "--degree", "3"],
    );
    let plan_doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    let spec_path = dir.path().join("triple.json");
    std::fs::write(&spec_path, serde_json::to_string(&plan_doc["cover"]).unwrap()).unwrap();
    let subset = dir.path().join("arc.json");
    std::fs::write(&subset, "[0,1,2,3]").unwrap();
    let out = run(&[
        "cover",
        "components",
        "--base",
        base.to_str().unwrap(),
        "--spec",
        spec_path.to_str().unwrap(),
        "--subset",
        subset.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["count"], 3, "contractible arc lifts to all sheets");
    assert_eq!(doc["matches"], true);
}

#[test]
fn respec_and_count_commands() {
    let out = run(&["stab", "respec", "--random", "5", "--seed", "3"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["total"], 8);
    assert_eq!(doc["passed"], 8);

    let out = run(&["stab", "count", "--free-rank", "2", "--n", "2"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["report"]["a_n"], 3);
    assert_eq!(doc["report"]["bound_holds"], true);
}

#[test]
fn tower_command_runs() {
    let dir = tempfile::tempdir().unwrap();
    let base =
        run_to(dir.path(), "c3.json", &["surface", "make", "--kind", "cycle", "--params", "3"]);
    let out = run(&[
        "stab", "tower", "--base", base.to_str().unwrap(), "--levels", "4", "--l", "2", "--roof",
        "0.2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["trajectory"].as_array().unwrap().len(), 5);
    assert_eq!(doc["entered_below_roof"], true);
}

#[test]
fn batch_runs_jobs_in_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let mut job_files = Vec::new();
    for (i, n) in [6usize, 8, 10].iter().enumerate() {
        let job = serde_json::json!({
            "args": ["surface", "make", "--kind", "cycle", "--params", n.to_string()],
            "out": dir.path().join(format!("c{i}.json")),
        });
        let path = dir.path().join(format!("job{i}.json"));
        std::fs::write(&path, serde_json::to_string(&job).unwrap()).unwrap();
        job_files.push(path);
    }
    let args: Vec<String> = ["batch", "--jobs", "3"]
        .iter()
        .map(|s| s.to_string())
        .chain(job_files.iter().map(|p| p.to_str().unwrap().to_string()))
        .collect();
    let out = Command::new(bin()).args(&args).output().unwrap();
    assert!(out.status.success());
    for i in 0..3 {
        let doc: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(format!("c{i}.json"))).unwrap(),
        )
        .unwrap();
        assert!(doc["vertices"].is_number());
    }
}

#[test]
fn config_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\"seed\": 99}").unwrap();
    let out = Command::new(bin())
        .env("COVLAP_CONFIG", cfg.to_str().unwrap())
        .args(["surface", "make", "--kind", "cycle", "--params", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["seed"], 99);
}
