use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_drift-approx"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("failed to start drift-approx")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(
        !text.contains('\r'),
        "{} has CR line endings",
        path.display()
    );
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn penalized_sweep_writes_one_csv_per_delta() {
    for scenario in ["example1_independent", "example2_dependent"] {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let o = run(
            &[
                "solve-penalized",
                "--scenario",
                scenario,
                "--N",
                "100",
                "--out",
                out,
            ],
            &[],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let m = manifest(&dir.path().join("solve_penalized.json"));
        assert_eq!(m["success"], true);
        assert_eq!(m["config"]["N"], 100);
        let files = m["files"].as_array().unwrap();
        assert_eq!(files.len(), 9);
        for f in files {
            let rows = csv_rows(&dir.path().join(f.as_str().unwrap()));
            assert_eq!(rows[0], ["t", "u"]);
            assert_eq!(rows.len(), 602);
            assert_eq!(rows[1][0].parse::<f64>().unwrap(), 0.0);
            assert_eq!(rows[601][0].parse::<f64>().unwrap(), 1.0);
        }
        for d in m["diagnostics"].as_array().unwrap() {
            assert!(d["condition_estimate"].as_f64().unwrap() > 1.0);
            assert!(d["residual_max"].as_f64().unwrap().is_finite());
        }
    }
}

#[test]
fn empty_delta_list_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "solve-penalized",
            "--delta",
            "",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta_list"));
    let o = run(
        &[
            "solve-penalized",
            "--delta",
            "0.01,0.1",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn galerkin_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(
        &[
            "solve-galerkin",
            "--scenario",
            "example1_independent",
            "--m",
            "5",
            "--out",
            out,
        ],
        &[],
    );
    assert!(o.status.success());
    let values = csv_rows(&dir.path().join("galerkin_values.csv"));
    assert_eq!(values.len(), 602);
    for r in &values[1..] {
        let (t, u): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        if (0.05..=0.95).contains(&t) {
            assert!((u - 1.0).abs() < 2e-2, "u({t}) = {u}");
        }
    }

    let o = run(
        &[
            "solve-galerkin",
            "--scenario",
            "example2_dependent",
            "--m",
            "5",
            "--out",
            out,
        ],
        &[],
    );
    assert!(o.status.success());
    let values = csv_rows(&dir.path().join("galerkin_values.csv"));
    let u: Vec<f64> = values[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    let spread =
        u.iter().cloned().fold(f64::MIN, f64::max) - u.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        spread > 0.1,
        "Galerkin solution should vary, spread {spread}"
    );
    let m = manifest(&dir.path().join("solve_galerkin.json"));
    assert!(m["diagnostics"]["integral"].as_f64().unwrap() > 0.0);

    let o = run(&["solve-galerkin", "--m", "0", "--out", out], &[]);
    assert!(o.status.success());
    let coeffs = csv_rows(&dir.path().join("galerkin_coefficients.csv"));
    assert_eq!(coeffs.len(), 2);
    assert_eq!(coeffs[0], ["n", "c_n"]);
}

#[test]
fn moment_table_has_the_published_shape() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "reproduce-table",
            "--table",
            "2",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("table2.csv"));
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0].len(), 11);
    assert_eq!(rows[0][10], "exact");
    for (j, r) in rows[1..].iter().enumerate() {
        assert_eq!(r[10].parse::<f64>().unwrap(), 1.0 / (j + 1) as f64);
    }
    let checks = csv_rows(&dir.path().join("table2_checks.csv"));
    assert_eq!(checks.len(), 37);
    assert!(checks[1..].iter().all(|r| r[6] == "pass"));
}

#[test]
fn lp_table_has_the_published_shape_and_exit_code_follows_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "reproduce-table",
            "--table",
            "3",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    let rows = csv_rows(&dir.path().join("table3.csv"));
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].len(), 10);
    let m = manifest(&dir.path().join("table3.json"));
    assert_eq!(o.status.success(), m["success"].as_bool().unwrap());
}

#[test]
fn tiny_monte_carlo_table_is_inconclusive_but_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "reproduce-table",
            "--table",
            "1",
            "--n-traj",
            "10",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let checks = csv_rows(&dir.path().join("table1_checks.csv"));
    assert!(checks.len() > 1);
    assert!(checks[1..].iter().all(|r| r[6] == "inconclusive"));
}

#[test]
fn cost_estimates_do_not_depend_on_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        vec![
            "estimate-cost".to_string(),
            "--scenario".into(),
            "example2_dependent".into(),
            "--N".into(),
            "10".into(),
            "--delta".into(),
            "0.1,0.01".into(),
            "--n-traj".into(),
            "2000".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            out.into(),
        ]
    };
    let run_with = |dir: &Path, threads: &str| {
        let owned = args(dir.to_str().unwrap());
        let refs: Vec<&str> = owned.iter().map(String::as_str).collect();
        let o = run(&refs, &[("DRIFT_APPROX_THREADS", threads)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(dir.join("costs.csv")).unwrap()
    };
    let one = run_with(a.path(), "1");
    let four = run_with(b.path(), "4");
    assert_eq!(one, four);
    assert_eq!(one.lines().count(), 5);
    assert!(one.starts_with("label,mean,std_error,accepted,aborted\n"));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"scenario":"custom","custom":{"drift":-0.5,"horizon":2.0},"N":4,"delta_list":[0.1,0.01],"seed":5}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(
        &[
            "solve-penalized",
            "--config",
            cfg.to_str().unwrap(),
            "--N",
            "3",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out.join("solve_penalized.json"));
    assert_eq!(m["config"]["N"], 3);
    assert_eq!(m["config"]["seed"], 5);
    assert_eq!(m["config"]["custom"]["horizon"], 2.0);
    let rows = csv_rows(&out.join("penalized_01.csv"));
    assert_eq!(rows.len(), 20);
    assert_eq!(rows[19][0].parse::<f64>().unwrap(), 2.0);
}
