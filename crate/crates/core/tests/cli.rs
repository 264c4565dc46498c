use std::process::{Command, Output};

use serde_json::Value;

fn nc_cover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nc-cover"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_report(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = nc_cover(&full);
    let v = serde_json::from_slice(&out.stdout).expect("json on stdout");
    (out.status.code().unwrap(), v)
}

#[test]
fn list_names_every_scenario() {
    let out = nc_cover(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(
        names,
        [
            "verify-torus-cover",
            "circle-cover",
            "torus-extension",
            "su2-counterexample",
            "mapping-cone",
            "morita-twist",
            "rep-suite"
        ]
    );
    assert_eq!(nc_cover(&["list", "--json", "x"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["no-such-scenario"],
        vec!["morita-twist", "--bogus", "1"],
        vec!["morita-twist", "--m"],
        vec!["morita-twist", "--m", "two"],
        vec!["morita-twist", "--tol-nothing", "1"],
        vec!["verify-torus-cover", "--theta", "[1,0]"],
        vec!["morita-twist", "--format", "xml"],
        vec!["morita-twist", "stray"],
    ] {
        let out = nc_cover(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    // clap itself rejects a missing scenario
    assert_eq!(nc_cover(&[]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_one() {
    let out = nc_cover(&["morita-twist", "--tol-witness_residual", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FAIL"));
}

#[test]
fn torus_cover_passes_with_every_theta_spelling() {
    for theta in ["[1,3]", "1/3", "0.4142135623730951"] {
        let (code, v) = json_report(&["verify-torus-cover", "--theta", theta, "--trials", "5"]);
        assert_eq!(code, 0, "{theta}");
        assert_eq!(v["pass"], true);
    }
    let (code, _) = json_report(&[
        "verify-torus-cover",
        "--m=3",
        "--n=2",
        "--k=5",
        "--theta=[1,7]",
        "--N",
        "6",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn su2_conclusion() {
    let (code, v) = json_report(&["su2-counterexample"]);
    assert_eq!(code, 0);
    assert!(v["conclusion"]
        .as_str()
        .unwrap()
        .contains("NOT a noncommutative covering projection"));
}

#[test]
fn circle_cover_three_sheets() {
    let (code, v) = json_report(&["circle-cover", "--n", "3"]);
    assert_eq!(code, 0);
    let checks = v["checks"].as_array().unwrap();
    let winding = checks.iter().find(|c| c["label"] == "winding").unwrap();
    assert_eq!(winding["value"], 3.0);
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn json_file_carries_duration_and_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let p = path.to_str().unwrap();
    let out = nc_cover(&["mapping-cone", "--json", p, "--format", "json"]);
    assert!(out.status.success());
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let stdout: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(file["duration_seconds"].as_f64().unwrap() >= 0.0);
    assert!(stdout.get("duration_seconds").is_none());
    let mut stripped = file.clone();
    stripped.as_object_mut().unwrap().remove("duration_seconds");
    assert_eq!(stripped, stdout);
}

#[test]
fn loop_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loop.json");
    let samples: Vec<[f64; 2]> = (0..256)
        .map(|j| {
            let t = std::f64::consts::TAU * 5.0 * j as f64 / 256.0;
            [t.cos(), t.sin()]
        })
        .collect();
    std::fs::write(&path, serde_json::to_string(&samples).unwrap()).unwrap();
    let (code, v) = json_report(&["mapping-cone", "--loop-file", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = v["details"].to_string();
    assert!(text.contains("\"winding\":5"), "{text}");
    assert!(text.contains("\"class\":2"), "{text}");
    let missing = nc_cover(&["mapping-cone", "--loop-file", dir.path().join("nope").to_str().unwrap()]);
    assert_ne!(missing.status.code(), Some(0));
}

#[test]
fn same_seed_gives_identical_bytes() {
    for args in [
        vec!["verify-torus-cover", "--seed", "42"],
        vec!["torus-extension"],
        vec!["morita-twist", "--m", "2", "--n", "3", "--k", "5"],
    ] {
        let mut full = args.clone();
        full.extend(["--format", "json"]);
        let a = nc_cover(&full);
        let b = nc_cover(&full);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn text_output_is_a_table() {
    let out = nc_cover(&["morita-twist"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("scenario: morita-twist"));
    assert!(text.contains("verdict: PASS"));
    assert!(text.lines().any(|l| l.starts_with("witness_residual")));
}
