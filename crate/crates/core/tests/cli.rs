use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lrdboot::experiment::report::{DIAGNOSTICS_COLUMNS, JM_ESTIMATE_COLUMNS};

fn lrdboot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrdboot")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn presets_are_listed() {
    let o = lrdboot(&["presets"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["identity-m1", "hermite2-m2", "smoke"] {
        assert!(text.contains(name), "{text}");
    }
    let o = lrdboot(&["presets", "--show", "smoke"]);
    let config = lrdboot::experiment::parse_config(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(config.n, vec![64]);
    assert_eq!(lrdboot(&["presets", "--show", "nope"]).status.code(), Some(2));
}

#[test]
fn smoke_run_writes_documented_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("smoke");
    let o = lrdboot(&["run", "--preset", "smoke", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["config_echo.json", "diagnostics.csv", "jm_estimate.csv", "report.json"]);
    assert_eq!(header(&out.join("diagnostics.csv")), DIAGNOSTICS_COLUMNS.join(","));
    assert_eq!(header(&out.join("jm_estimate.csv")), JM_ESTIMATE_COLUMNS.join(","));

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "lrdboot.scenario-report/v1");
    assert_eq!(report["rank"], 1);
    let echo = fs::read_to_string(out.join("config_echo.json")).unwrap();
    assert_eq!(
        lrdboot::experiment::parse_config(&echo).unwrap(),
        lrdboot::experiment::preset("smoke").unwrap()
    );

    let again = lrdboot(&["run", "--preset", "smoke", "--out", out.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(4));
    assert!(stderr(&again).contains("--overwrite"));
    let forced = lrdboot(&["run", "--preset", "smoke", "--out", out.to_str().unwrap(), "--overwrite"]);
    assert!(forced.status.success());
}

#[test]
fn csvs_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    fs::write(
        &config,
        r#"{"model": {"family": "poly", "d": 0.3}, "transform": "hermite:2", "n": [256, 512],
            "l_rule": {"fixed": 16}, "A": 40, "R": 12, "master_seed": 5}"#,
    )
    .unwrap();
    let mut bodies = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = lrdboot(&[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        bodies.push((
            fs::read(out.join("diagnostics.csv")).unwrap(),
            fs::read(out.join("jm_estimate.csv")).unwrap(),
        ));
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"model": {"family": "poly", "d": 0.3}, "transform": "identity", "n": [64], "l_rule": {"power": 1.2}}"#)
        .unwrap();
    let o = lrdboot(&["run", "--config", bad.to_str().unwrap(), "--out", dir.path().join("o1").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("l_rule.power"), "{}", stderr(&o));

    let regime = dir.path().join("regime.json");
    fs::write(
        &regime,
        r#"{"model": {"family": "poly", "d": 0.6}, "transform": "hermite:2", "n": [64], "l_rule": {"fixed": 4}, "A": 1, "R": 1}"#,
    )
    .unwrap();
    let o = lrdboot(&["run", "--config", regime.to_str().unwrap(), "--out", dir.path().join("o2").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let o = lrdboot(&["run", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn estimate_jm_on_simulated_and_loaded_data() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    fs::write(
        &config,
        r#"{"model": {"family": "poly", "d": 0.3}, "transform": "identity", "n": [1024], "l_rule": {"fixed": 32}, "A": 50}"#,
    )
    .unwrap();
    let out = dir.path().join("sim");
    let o = lrdboot(&["estimate-jm", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(header(&out.join("jm_estimate.csv")), JM_ESTIMATE_COLUMNS.join(","));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("jm_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["entries"][0]["meta"]["n"], 1024);

    let data = dir.path().join("y.csv");
    let y: Vec<String> = (0..300).map(|i| format!("{:.6}", (i as f64 * 0.37).sin())).collect();
    fs::write(&data, y.join("\n")).unwrap();
    let with_data = dir.path().join("d.json");
    fs::write(
        &with_data,
        format!(
            r#"{{"model": {{"family": "poly", "d": 0.3}}, "transform": "identity", "n": [300], "m_override": 1,
                "l_rule": {{"fixed": 10}}, "A": 20, "data_path": {:?}}}"#,
            data.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = dir.path().join("data");
    let o = lrdboot(&["estimate-jm", "--config", with_data.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("jm_estimate.csv")).unwrap().lines().count(), 1 + 103);
}
