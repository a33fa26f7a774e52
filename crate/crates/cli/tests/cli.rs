use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use linepack_cli::BUNDLED_SCENARIO;

fn linepack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linepack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_sections_timeline_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "paper.json", BUNDLED_SCENARIO);
    let out = tmp.path().join("out");
    let o = linepack(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in [
        "section1.csv",
        "section2.csv",
        "section3.csv",
        "timeline.json",
        "dispatch.json",
        "manifest.json",
    ] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let timeline: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("timeline.json")).unwrap()).unwrap();
    let times: Vec<f64> = timeline["events"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["time"].as_f64().unwrap())
        .collect();
    assert_eq!(times.len(), 4);
    assert_eq!(times[0], 300.0);
    assert_eq!(times[1], 300.0);
    assert!((times[2] - 555.0).abs() <= 2.0, "{times:?}");
    assert!((times[3] - 555.0).abs() <= 2.0, "{times:?}");
}

#[test]
fn si_flag_switches_to_pascal() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "paper.json", BUNDLED_SCENARIO);
    let out = tmp.path().join("si");
    let o = linepack(&[
        "run",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--si",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("section1.csv")).unwrap();
    let first: f64 = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(first, 133_600.0);
}

#[test]
fn threshold_error_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "eps.json",
        &BUNDLED_SCENARIO.replace("\"eps\": 1.35", "\"eps\": 1.0"),
    );
    let o = linepack(&[
        "run",
        "--config",
        &cfg,
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ThresholdError"), "{}", stderr(&o));
}

#[test]
fn unknown_key_exits_2_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.json",
        &BUNDLED_SCENARIO.replace("\"horizon\"", "\"horizont\""),
    );
    let o = linepack(&["verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("horizont"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "paper.json", BUNDLED_SCENARIO);
    let blocker = tmp.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let o = linepack(&["run", "--config", &cfg, "--out", blocker.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn missing_config_exits_4() {
    let o = linepack(&["t2", "--config", "/nonexistent/linepack.json"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn verify_passes_on_reference_and_fails_on_coarse_step() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "paper.json", BUNDLED_SCENARIO);
    let o = linepack(&["verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let coarse = BUNDLED_SCENARIO.replace("\"dt\": 1.0", "\"dt\": 120.0");
    assert_ne!(coarse, BUNDLED_SCENARIO);
    let cfg = write_config(tmp.path(), "coarse.json", &coarse);
    let o = linepack(&["verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(5));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let worst = report["sections"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["max_rel_dev"].as_f64().unwrap())
        .fold(0.0, f64::max);
    assert!(worst > 0.01, "{worst}");
}

#[test]
fn t2_reports_both_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "paper.json", BUNDLED_SCENARIO);
    let o = linepack(&["t2", "--config", &cfg, "--method", "closed"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 1);
    assert!((results[0]["since_closure"].as_f64().unwrap() - 255.0).abs() <= 2.0);

    let o = linepack(&["t2", "--config", &cfg]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["results"].as_array().unwrap().len(), 2);
}

#[test]
fn t2_with_short_horizon_has_no_root_and_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "short.json",
        &BUNDLED_SCENARIO.replace("\"horizon\": 1800.0", "\"horizon\": 900.0"),
    );
    let o = linepack(&["t2", "--config", &cfg, "--method", "root"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn tables_and_runs_are_byte_identical_and_replayable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "paper.json", BUNDLED_SCENARIO);
    let dirs: Vec<_> = (0..2).map(|k| tmp.path().join(format!("t{k}"))).collect();
    for d in &dirs {
        let o = linepack(&["tables", "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in [
        "table1.csv",
        "table2.csv",
        "table3.csv",
        "table4.csv",
        "table_diff.json",
    ] {
        assert_eq!(
            fs::read(dirs[0].join(name)).unwrap(),
            fs::read(dirs[1].join(name)).unwrap(),
            "{name}"
        );
    }
    let table3 = fs::read_to_string(dirs[0].join("table3.csv")).unwrap();
    assert!(table3.starts_with("x_km,0,60,120,"));

    let first = tmp.path().join("r0");
    let o = linepack(&["run", "--config", &cfg, "--out", first.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = first.join("manifest.json");
    let replay = tmp.path().join("r1");
    let o = linepack(&[
        "run",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        replay.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in [
        "section1.csv",
        "section2.csv",
        "section3.csv",
        "timeline.json",
        "dispatch.json",
        "manifest.json",
    ] {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(replay.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn bad_tolerance_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = linepack(&[
        "tables",
        "--out",
        tmp.path().to_str().unwrap(),
        "--tolerance",
        "-1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
