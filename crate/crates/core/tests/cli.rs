use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn urykit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urykit"))
        .args(args)
        .env_remove("URYKIT_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn write(dir: &TempDir, name: &str, value: Value) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, value.to_string()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn two_points(dir: &TempDir) -> PathBuf {
    write(
        dir,
        "s.json",
        json!({ "points": ["p", "q"], "dist": [["0", "2"], ["2", "0"]] }),
    )
}

/// Distance between two labels in a space file.
fn dist(space: &Value, a: &str, b: &str) -> String {
    let points: Vec<&str> = space["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    let i = points.iter().position(|&p| p == a).unwrap();
    let j = points.iter().position(|&p| p == b).unwrap();
    space["dist"][i][j].as_str().unwrap().to_string()
}

#[test]
fn validate_distinguishes_parse_and_validation_errors() {
    let dir = TempDir::new().unwrap();
    let ok = urykit(&["validate", "--space", s(&two_points(&dir))]);
    assert_eq!(code(&ok), 0);
    assert_eq!(stdout_json(&ok)["diameter"], "2");

    let asym = write(
        &dir,
        "a.json",
        json!({ "points": ["p", "q"], "dist": [["0", "2"], ["1", "0"]] }),
    );
    assert_eq!(code(&urykit(&["validate", "--space", s(&asym)])), 1);

    let junk = write(&dir, "j.json", json!({ "points": ["p"], "dist": [["zero"]] }));
    assert_eq!(code(&urykit(&["validate", "--space", s(&junk)])), 1);

    let tri = write(
        &dir,
        "t.json",
        json!({ "points": ["a", "b", "c"], "dist": [["0", "1", "5"], ["1", "0", "1"], ["5", "1", "0"]] }),
    );
    let out = urykit(&["validate", "--space", s(&tri)]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains('a') && err.contains('b') && err.contains('c'), "{err}");

    assert_eq!(code(&urykit(&["validate", "--space", "/nonexistent.json"])), 1);
    assert_eq!(code(&urykit(&["validate"])), 1);
}

#[test]
fn extend_emits_the_joint_matrix() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.json", json!({ "points": ["x"], "dist": [["0"]] }));
    let f = write(
        &dir,
        "f.json",
        json!({ "points": ["a1", "a2"], "dist": [["0", "1"], ["1", "0"]] }),
    );
    let spec = write(&dir, "spec.json", json!({ "cross": [["1"], ["2"]] }));
    let out = urykit(&[
        "extend",
        "--space",
        s(&x),
        "--pattern",
        s(&f),
        "--spec",
        s(&spec),
        "--check-b",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let joint = stdout_json(&out);
    assert_eq!(dist(&joint, "x", "a1"), "1");
    assert_eq!(dist(&joint, "x", "a2"), "2");
    assert_eq!(dist(&joint, "a1", "a2"), "1");

    let bad = write(&dir, "bad.json", json!({ "cross": [["1"], ["3"]] }));
    assert_eq!(
        code(&urykit(&[
            "extend",
            "--space",
            s(&x),
            "--pattern",
            s(&f),
            "--spec",
            s(&bad)
        ])),
        2
    );
}

#[test]
fn realize_adds_the_extended_point() {
    let dir = TempDir::new().unwrap();
    let space = two_points(&dir);
    let map = write(&dir, "f.json", json!({ "domain": ["p"], "values": ["1"] }));
    let out = urykit(&["realize", "--space", s(&space), "--map", s(&map)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["new"], true);
    let z = v["point"].as_str().unwrap();
    assert_eq!(dist(&v["space"], z, "p"), "1");
    assert_eq!(dist(&v["space"], z, "q"), "3");

    let row = write(&dir, "g.json", json!({ "domain": ["p", "q"], "values": ["0", "2"] }));
    let out = urykit(&["realize", "--space", s(&space), "--map", s(&row)]);
    let v = stdout_json(&out);
    assert_eq!((v["point"].as_str(), &v["new"]), (Some("p"), &json!(false)));

    let bad = write(
        &dir,
        "h.json",
        json!({ "domain": ["p", "q"], "values": ["1/2", "1/2"] }),
    );
    assert_eq!(code(&urykit(&["realize", "--space", s(&space), "--map", s(&bad)])), 2);
}

#[test]
fn backforth_extends_a_swap() {
    let dir = TempDir::new().unwrap();
    let space = write(
        &dir,
        "s.json",
        json!({ "points": ["p", "q", "z"], "dist": [["0", "2", "1"], ["2", "0", "3"], ["1", "3", "0"]] }),
    );
    let phi = write(&dir, "phi.json", json!({ "domain": ["p", "q"], "range": ["q", "p"] }));
    let out = urykit(&[
        "backforth",
        "--space",
        s(&space),
        "--phi",
        s(&phi),
        "--forth",
        "z",
        "--back",
        "z",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let domain: Vec<&str> = v["phi"]["domain"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    let range: Vec<&str> = v["phi"]["range"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    let w = range[domain.iter().position(|&d| d == "z").unwrap()];
    assert_eq!(dist(&v["space"], w, "q"), "1");
    assert_eq!(dist(&v["space"], w, "p"), "3");
    assert!(range.contains(&"z"));

    let not_iso = write(&dir, "n.json", json!({ "domain": ["p", "z"], "range": ["q", "z"] }));
    assert_eq!(
        code(&urykit(&["backforth", "--space", s(&space), "--phi", s(&not_iso)])),
        2
    );
}

#[test]
fn urysohn_gen_is_reproducible_and_seed_env_wins() {
    let dir = TempDir::new().unwrap();
    let one = urykit(&["urysohn-gen", "--distances", "1,2", "--rounds", "1", "--cap", "1"]);
    assert_eq!(stdout_json(&one)["points"].as_array().unwrap().len(), 3);

    let args = [
        "urysohn-gen",
        "--distances",
        "1,2",
        "--rounds",
        "2",
        "--cap",
        "2",
        "--seed",
        "42",
    ];
    let a = urykit(&args);
    let b = urykit(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let out = dir.path().join("u.json");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", s(&out)]);
    assert_eq!(code(&urykit(&with_out)), 0);
    assert_eq!(fs::read(&out).unwrap(), a.stdout);

    let env = Command::new(env!("CARGO_BIN_EXE_urykit"))
        .args([
            "urysohn-gen",
            "--distances",
            "1,2",
            "--rounds",
            "2",
            "--cap",
            "2",
            "--seed",
            "5",
        ])
        .env("URYKIT_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);

    assert_eq!(code(&urykit(&["urysohn-gen", "--distances", "1,x"])), 1);
    assert_eq!(code(&urykit(&["urysohn-gen", "--distances", "1,2", "--cap", "0"])), 2);
}

#[test]
fn homotopy_reports_margins_and_modulus() {
    let dir = TempDir::new().unwrap();
    let space = write(
        &dir,
        "s.json",
        json!({ "points": ["y", "u", "v"], "dist": [["0", "1", "2"], ["1", "0", "1"], ["2", "1", "0"]] }),
    );
    let t0 = write(&dir, "t0.json", json!(["u"]));
    let t1 = write(&dir, "t1.json", json!(["v"]));
    let open = write(
        &dir,
        "V.json",
        json!({ "anchors": [{ "index": 0, "target": "y", "radius": "5/2" }] }),
    );
    let path = dir.path().join("path.json");
    let out = urykit(&[
        "homotopy",
        "--space",
        s(&space),
        "--phi0",
        s(&t0),
        "--phi1",
        s(&t1),
        "--grid",
        "4",
        "--open-set",
        s(&open),
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["grid"].as_array().unwrap().len(), 5);
    assert_eq!(v["margins"].as_array().unwrap().len(), 5);
    assert_eq!(v["within_open_set"], true);
    assert_eq!(v["modulus_holds"], true);
    let middle = v["tuples"][2][0].as_str().unwrap();
    assert_eq!(dist(&v["space"], middle, "y"), "3/2");

    let tight = write(
        &dir,
        "W.json",
        json!({ "anchors": [{ "index": 0, "target": "y", "radius": "3/2" }] }),
    );
    let out = urykit(&[
        "homotopy",
        "--space",
        s(&space),
        "--phi0",
        s(&t0),
        "--phi1",
        s(&t1),
        "--open-set",
        s(&tight),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn stabilize_writes_a_verifiable_trace() {
    let dir = TempDir::new().unwrap();
    // Equilateral A = {a1, a2}, B = {b1}; phi swaps a1 and a2.
    let space = write(
        &dir,
        "s.json",
        json!({
            "points": ["a1", "a2", "b1"],
            "dist": [["0", "2", "2"], ["2", "0", "2"], ["2", "2", "0"]],
        }),
    );
    let phi = write(
        &dir,
        "phi.json",
        json!({ "domain": ["a1", "a2"], "range": ["a2", "a1"] }),
    );
    let trace = dir.path().join("trace.json");
    let out = urykit(&[
        "stabilize",
        "--space",
        s(&space),
        "--A",
        "a1,a2",
        "--B",
        "b1",
        "--phi",
        s(&phi),
        "--eps",
        "1/100",
        "--max-iter",
        "10000",
        "--seed",
        "7",
        "--trace",
        s(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["within_epsilon"], true);
    let t: Value = serde_json::from_slice(&fs::read(&trace).unwrap()).unwrap();
    assert!(!t["steps"].as_array().unwrap().is_empty());
    for step in t["steps"].as_array().unwrap() {
        assert!(["A-move", "B-move", "perturb"].contains(&step["tag"].as_str().unwrap()));
    }

    let disp = urykit(&[
        "displacement",
        "--space",
        s(&space),
        "--word",
        s(&trace),
        "--point",
        "b1",
    ]);
    assert_eq!(code(&disp), 0, "{}", String::from_utf8_lossy(&disp.stderr));
    assert_eq!(stdout_json(&disp)["all_hold"], true);

    // A forged objective is caught before any audit runs.
    let mut forged = t.clone();
    forged["steps"][0]["objective"] = json!("1/1000");
    let forged_path = write(&dir, "forged.json", forged);
    assert_ne!(
        code(&urykit(&["displacement", "--word", s(&forged_path), "--point", "b1"])),
        0
    );

    let cap = urykit(&["stabilize", "--random", "--seed", "3", "--max-iter", "1"]);
    assert_eq!(code(&cap), 2);
    assert!(String::from_utf8_lossy(&cap.stderr).contains("iteration cap"));
}

#[test]
fn stabilize_reports_a_forced_flat_triangle() {
    let dir = TempDir::new().unwrap();
    // d(c2,b2) is pinned to 2 through a0 and a1, so {a0, b2, c2} is flat
    // for every admissible target.
    let space = write(
        &dir,
        "s.json",
        json!({
            "points": ["a0", "a1", "a2", "b2", "c2"],
            "dist": [
                ["0", "2", "1", "1", "1"],
                ["2", "0", "3", "1", "3"],
                ["1", "3", "0", "2", "2"],
                ["1", "1", "2", "0", "2"],
                ["1", "3", "2", "2", "0"],
            ],
        }),
    );
    let phi = write(
        &dir,
        "phi.json",
        json!({ "domain": ["a0", "a1", "a2"], "range": ["a0", "a1", "c2"] }),
    );
    let out = urykit(&[
        "stabilize",
        "--space",
        s(&space),
        "--A",
        "a0,a1,a2",
        "--B",
        "a0,a1,b2",
        "--phi",
        s(&phi),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("{a_0, b_2, c_2}"));
}

#[test]
fn stabilize_random_instances() {
    for seed in ["0", "3", "11"] {
        let out = urykit(&["stabilize", "--random", "--seed", seed]);
        assert_eq!(code(&out), 0, "seed {seed}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(code(&urykit(&["stabilize", "--random", "--eps", "0"])), 2);
}

#[test]
fn check_runs_suites() {
    let empty = urykit(&["check", "--suite", "all", "--budget", "0"]);
    assert_eq!(code(&empty), 0);
    assert_eq!(stdout_json(&empty)["results"], json!([]));

    let out = urykit(&["check", "--suite", "katetov", "--budget", "30", "--seed", "9"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["results"].as_array().unwrap().len(), 4);

    assert_eq!(code(&urykit(&["check", "--suite", "nope"])), 1);
}
