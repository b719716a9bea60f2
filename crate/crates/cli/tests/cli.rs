use std::fs;
use std::process::{Command, Output};

fn srt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srt"))
        .args(args)
        .env_remove("SRT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Value of `column` in the first data row of a CSV artifact.
fn field(csv: &str, column: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == column).unwrap();
    row[k].to_string()
}

#[test]
fn dt_outage_at_intercept_constraint() {
    let o = srt(&["dt-srt", "--mer-db", "10", "--p-int", "0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p_out: f64 = field(&stdout(&o), "p_out").parse().unwrap();
    assert!((p_out - 0.2056718).abs() < 5e-8, "{p_out}");
}

#[test]
fn capacity_error_names_cap() {
    let o = srt(&[
        "ors-exact",
        "--mer-db",
        "10",
        "--n-relays",
        "25",
        "--delta",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    let line: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(line["error"], "capacity");
    assert!(line["message"].as_str().unwrap().contains("at most 20"));
}

#[test]
fn missing_keys_listed_together() {
    let o = srt(&["ors-exact"]);
    assert_eq!(o.status.code(), Some(1));
    let line: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    let msg = line["message"].as_str().unwrap();
    assert_eq!(line["error"], "missing");
    for key in ["mer", "n_relays", "delta"] {
        assert!(msg.contains(key), "{msg}");
    }
}

#[test]
fn both_unit_forms_rejected() {
    let o = srt(&["dt-srt", "--mer", "10", "--mer-db", "10", "--p-int", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not both"));
}

#[test]
fn bad_flag_is_a_config_error() {
    let o = srt(&["dt-srt", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    let line: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(line["error"], "config");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"mer_db": 0, "p_int": 0.1}"#).unwrap();
    let o = srt(&["dt-srt", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "p_out"), "0.9");
    let o = srt(&[
        "dt-srt",
        "--config",
        cfg.to_str().unwrap(),
        "--mer-db",
        "10",
    ]);
    let p_out: f64 = field(&stdout(&o), "p_out").parse().unwrap();
    assert!((p_out - 0.2056718).abs() < 5e-8);
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"mer_db": 10, "pint": 0.1}"#).unwrap();
    let o = srt(&["dt-srt", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("pint"));
}

#[test]
fn gains_file_drives_exact_engine() {
    let dir = tempfile::tempdir().unwrap();
    let gains = dir.path().join("gains.json");
    fs::write(
        &gains,
        r#"{"sigma_sd2": 1, "sigma_se2": 1, "sigma_si2": [1], "sigma_id2": [1], "sigma_ie2": [1]}"#,
    )
    .unwrap();
    let o = srt(&[
        "ors-exact",
        "--gains-file",
        gains.to_str().unwrap(),
        "--delta",
        "0.1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let p_int: f64 = field(&out, "p_int").parse().unwrap();
    assert!((p_int - 0.9827499504322236).abs() < 1e-12, "{p_int}");
    assert_eq!(field(&out, "n_relays"), "1");
}

#[test]
fn solve_reports_finite_and_asymptotic() {
    let o = srt(&[
        "solve",
        "--mer-db",
        "5",
        "--n-relays",
        "100",
        "--p-int",
        "0.1",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains("analytic_iid") && rows[1].contains("asymptotic"));
}

#[test]
fn mc_is_reproducible_and_prints_seed() {
    let args = [
        "mc",
        "--mer-db",
        "10",
        "--n-relays",
        "2",
        "--delta",
        "0.3",
        "--trials",
        "50000",
    ];
    let a = srt(&args);
    let mut more = args.to_vec();
    more.extend(["--workers", "1"]);
    let b = srt(&more);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains(",50000,42,"));
}

#[test]
fn sweep_writes_rows_and_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.json");
    let o = srt(&[
        "sweep",
        "--kind",
        "outage-vs-n",
        "--mer-db",
        "5",
        "--p-int",
        "0.1",
        "--grid-max",
        "64",
        "--grid-points",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 14);
    let checks: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.checks.json")).unwrap())
            .unwrap();
    assert!(checks
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
}

#[test]
fn out_dir_variable_applies_to_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_srt"))
        .args([
            "dt-srt", "--mer-db", "10", "--p-int", "0.1", "--out", "dt.csv",
        ])
        .env("SRT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("dt.csv").exists());
}

#[test]
fn verify_fault_exits_two() {
    let o = srt(&[
        "verify",
        "--trials",
        "100000",
        "--inject-fault",
        "1e-6",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let records: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failing: Vec<_> = records
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["kind"] == "failure")
        .collect();
    assert!(!failing.is_empty());
    assert!(stderr(&o).contains("pass mc_containment"));
}

#[test]
fn verify_too_few_trials_is_a_domain_error() {
    let o = srt(&["verify", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(1));
}
