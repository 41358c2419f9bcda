use std::process::{Command, Output};

use serde_json::Value;

fn bdris(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdris"))
        .args(args)
        .output()
        .expect("spawn bdris")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn sweep_gain_reference_rows() {
    let out = bdris(&["sweep-gain", "--chi", "0,0.1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, ["scenario", "chi", "gain"]);
    assert_eq!(rows.len(), 12);
    let gain = |scenario: &str, chi: &str| {
        rows.iter()
            .find(|r| r[0] == scenario && r[1] == chi)
            .map(|r| r[2].clone())
            .unwrap()
    };
    for s in ["rayleigh-same", "rayleigh-opposite"] {
        assert_eq!(gain(s, "1"), "1.62113893828");
    }
    for s in ["los-same", "los-opposite"] {
        assert_eq!(gain(s, "1"), "1");
    }
    assert_eq!(gain("los-opposite", "0.1"), "3.025");
    assert_eq!(gain("los-opposite", "0"), "inf");
    assert_eq!(gain("rayleigh-opposite", "0"), "inf");
    // scenario order is fixed
    let order: Vec<&str> = rows.iter().step_by(3).map(|r| r[0].as_str()).collect();
    assert_eq!(
        order,
        [
            "rayleigh-same",
            "rayleigh-opposite",
            "los-same",
            "los-opposite"
        ]
    );
}

#[test]
fn sweep_gain_default_grid_and_json() {
    let out = bdris(&[
        "sweep-gain",
        "--format",
        "json",
        "--scenario",
        "los-opposite",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 101);
    assert_eq!(rows[0]["gain"], "inf");
    assert_eq!(rows[100]["gain"].as_f64(), Some(1.0));
}

#[test]
fn sweep_gain_finite_and_empirical_columns() {
    let out = bdris(&[
        "sweep-gain",
        "--chi",
        "0.5",
        "--n",
        "8",
        "--trials",
        "200",
        "--scenario",
        "rayleigh-same",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(
        header,
        [
            "scenario",
            "chi",
            "gain",
            "n_elements",
            "finite_ratio",
            "trials",
            "seed",
            "empirical_ratio",
            "empirical_stderr"
        ]
    );
    let ratio: f64 = rows[0][7].parse().unwrap();
    assert!(ratio > 1.0);
}

#[test]
fn pareto_reference_rows() {
    let out = bdris(&["pareto", "--chi", "0.1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, ["n_elements", "chi", "n", "complexity", "power"]);
    assert_eq!(rows.len(), 66);
    assert_eq!(rows[0][2..], ["0", "64", "409.6"]);
    assert_eq!(rows[32][2..], ["32", "96", "1239.04"]);
    assert!(rows[33..].iter().all(|r| r[4] == "4096"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["pareto", "--n", "7"][..],
        &["pareto", "--chi", "1.5"],
        &["sweep-gain", "--scenario", "rician-same"],
        &["synth", "--arch", "1,3;2"],
        &["synth", "--arch", "1,x;2,4"],
        &["verify-scaling", "--trials", "0"],
        &["no-such-command"],
    ] {
        let out = bdris(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn io_failure_names_the_path() {
    let out = bdris(&["pareto", "--out", "/nonexistent-dir/p.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/p.csv"));
}

#[test]
fn verify_scaling_passes_and_los_cells_are_exact() {
    let out = bdris(&[
        "verify-scaling",
        "--n",
        "8",
        "--chi",
        "0,0.5",
        "--trials",
        "20000",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(
        header,
        [
            "scenario",
            "arch",
            "n_elements",
            "chi",
            "trials",
            "seed",
            "mean",
            "stderr",
            "target",
            "verdict"
        ]
    );
    // (2 relations x 2 chi + uni) x 2 archs x 2 fadings
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[9] == "pass"));
    for r in rows.iter().filter(|r| r[0].starts_with("los")) {
        assert_eq!(r[7], "0");
        assert_eq!(r[6], r[8]);
    }
}

#[test]
fn corrupted_law_fails_with_exit_one() {
    let out = bdris(&[
        "verify-scaling",
        "--n",
        "8",
        "--chi",
        "0.5",
        "--trials",
        "20000",
        "--law-scale",
        "1.1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains(",fail"));
}

#[test]
fn verify_scaling_json_report_fields() {
    let out = bdris(&[
        "verify-scaling",
        "--n",
        "4",
        "--chi",
        "1",
        "--trials",
        "1000",
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in ["mean", "stderr", "trials", "seed", "target", "verdict"] {
        assert!(v[0].get(key).is_some(), "{key}");
    }
}

fn synth_json(args: &[&str]) -> Value {
    let mut full = vec!["synth"];
    full.extend_from_slice(args);
    let out = bdris(&full);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn synth_fully_reaches_bound() {
    let v = synth_json(&[
        "--n",
        "4",
        "--arch",
        "fully",
        "--scenario",
        "rayleigh-opposite",
        "--seed",
        "5",
    ]);
    assert!((v["ratio"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    assert_eq!(v["groups"], serde_json::json!([[1, 2, 3, 4]]));
    assert!(v["residuals"]["unitarity"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["re"].as_array().unwrap().len(), 4);
    assert!(v["channel"].is_object());
}

#[test]
fn synth_single_with_aligned_phases_is_identity() {
    let v = synth_json(&[
        "--n",
        "4",
        "--chi",
        "1",
        "--arch",
        "single",
        "--scenario",
        "los-same",
        "--zero-phases",
    ]);
    for i in 0..4 {
        for j in 0..4 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert_eq!(v["re"][i][j].as_f64(), Some(expect));
            assert_eq!(v["im"][i][j].as_f64(), Some(0.0));
        }
    }
}

#[test]
fn synth_explicit_partition_is_block_sparse() {
    let v = synth_json(&[
        "--n",
        "4",
        "--arch",
        "1,3;2,4",
        "--scenario",
        "rayleigh-same",
        "--seed",
        "2",
    ]);
    assert_eq!(v["groups"], serde_json::json!([[1, 3], [2, 4]]));
    assert_eq!(v["residuals"]["block"].as_f64(), Some(0.0));
    for (i, j) in [(0, 1), (0, 3), (1, 2), (2, 3)] {
        assert_eq!(v["re"][i][j].as_f64(), Some(0.0));
        assert_eq!(v["im"][j][i].as_f64(), Some(0.0));
    }
}

#[test]
fn oracle_check_emits_passing_verdicts() {
    let out = bdris(&["oracle-check", "--n", "4", "--chi", "0.1,0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["verdict"] == "pass"));
    assert!(rows
        .iter()
        .filter(|r| r["n"].as_u64() != Some(0))
        .all(|r| r["structure_ok"] == true));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gain.csv");
    let to_file = bdris(&[
        "sweep-gain",
        "--chi",
        "0.3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    let direct = bdris(&["sweep-gain", "--chi", "0.3"]);
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}
