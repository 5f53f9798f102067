use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use exoarm::report::Report;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn exoarm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exoarm")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("design.toml");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn size_prints_the_design_point() {
    let out = exoarm(&["size", "-c", &fixture("reference_design.toml")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    for needle in ["264.32 N", "25.71 mm", "30 mm", "150.0 mm", "376.99 N", "1.426"] {
        assert!(text.contains(needle), "missing {needle}:\n{text}");
    }
    assert!(stderr(&out).is_empty());
}

#[test]
fn missing_config_names_the_path() {
    let out = exoarm(&["size", "-c", "no/such/design.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no/such/design.toml"));
    assert!(stdout(&out).is_empty());
}

#[test]
fn config_errors_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[load]\nmass_kg = 3\n", "mass_kg"),
        ("[geometry]\nab = -1\n", "geometry.ab"),
        ("[geometry\n", "design.toml"),
    ];
    for (body, needle) in cases {
        let path = write_config(dir.path(), body);
        let out = exoarm(&["size", "-c", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{body}");
        assert!(stderr(&out).contains(needle), "{body}: {}", stderr(&out));
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(exoarm(&[]).status.code(), Some(1));
    assert_eq!(exoarm(&["size"]).status.code(), Some(1));
    assert_eq!(exoarm(&["simulate", "-c", &fixture("reference_design.toml")]).status.code(), Some(1));
    assert_eq!(exoarm(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_trace_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("bad.csv");
    fs::write(&trace, "time_s,channel,value\n1.0,whistle,1\n").unwrap();
    let out = exoarm(&["simulate", "-c", &fixture("reference_design.toml"), "-t", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bad.csv"), "{}", stderr(&out));
}

#[test]
fn simulate_writes_one_full_lift() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sim");
    let out = exoarm(&[
        "simulate",
        "-c",
        &fixture("reference_design.toml"),
        "-t",
        &fixture("two_pulses.csv"),
        "-o",
        out_dir.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary = Report::from_json(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let sim = summary.simulation.unwrap();
    assert_eq!(sim.lift_count, 1);
    assert_eq!(sim.stall_episodes, 0);
    assert!((sim.lifts[0].duration_s - 1.5).abs() < 0.011);
    let csv = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("time_s,latch,relay,valve,"));
    assert!(csv.contains(",retract,"));
    let leftovers: Vec<_> = fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 2, "{leftovers:?}");
}

#[test]
fn overload_fails_checks_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "[load]\nmass_per_arm_kg = 100.0\n");
    let config = path.to_str().unwrap();
    let size = exoarm(&["size", "-c", config]);
    assert_eq!(size.status.code(), Some(2));
    assert_eq!(stdout(&size).matches("FAIL").count(), 1);
    let sim = exoarm(&["simulate", "-c", config, "-t", &fixture("two_pulses.csv")]);
    assert_eq!(sim.status.code(), Some(2));
    assert!(stdout(&sim).contains("FAIL simulation.stall"));
}

#[test]
fn exit_code_matches_verdicts() {
    let config = fixture("reference_design.toml");
    let trace = fixture("two_pulses.csv");
    let runs: [Vec<&str>; 5] = [
        vec!["size", "-c", &config],
        vec!["analyze", "-c", &config],
        vec!["analyze", "-c", &config, "--show-reference"],
        vec!["simulate", "-c", &config, "-t", &trace],
        vec!["report", "-c", &config, "-t", &trace],
    ];
    for args in runs {
        let out = exoarm(&args);
        let code = out.status.code().unwrap();
        let fails = stdout(&out).matches("FAIL").count();
        assert_eq!(code == 0, fails == 0, "{args:?}");
        assert!(code == 0 || code == 2, "{args:?}");
    }
}

#[test]
fn json_report_round_trips() {
    let out = exoarm(&["report", "-c", &fixture("reference_design.toml"), "--format", "json"]);
    let text = stdout(&out);
    let report = Report::from_json(&text).unwrap();
    assert_eq!(report.render_json(), text);
    assert!(report.sizing.is_some() && report.simulation.is_some());
    assert!(report.structural.is_some() && report.profile.is_some());
    assert!(report.warnings.is_empty(), "{:?}", report.warnings);
    assert_eq!(out.status.code(), Some(report.exit_code()));
}

#[test]
fn report_text_has_all_sections() {
    let out = exoarm(&["report", "-c", &fixture("reference_design.toml")]);
    let text = stdout(&out);
    for header in ["== Sizing ==", "== Simulation ==", "== Structural ==", "== Torque profile ==", "== Checks =="] {
        assert!(text.contains(header), "missing {header}");
    }
    assert!(text.contains("== Warnings ==\nnone"));
}

#[test]
fn report_directory_holds_curve_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("r");
    exoarm(&["report", "-c", &fixture("reference_design.toml"), "-o", out_dir.to_str().unwrap()]);
    let profile = fs::read_to_string(out_dir.join("torque_profile.csv")).unwrap();
    assert_eq!(profile.lines().count(), 11);
    let curve = fs::read_to_string(out_dir.join("force_vs_angle.csv")).unwrap();
    assert!(curve.lines().nth(1).unwrap().starts_with("120.000000,264.324"));
    assert!(out_dir.join("report.txt").is_file());
    assert!(out_dir.join("trajectory.csv").is_file());
}

#[test]
fn output_file_is_replaced_whole() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("size.txt");
    fs::write(&target, "x".repeat(100_000)).unwrap();
    let out = exoarm(&["size", "-c", &fixture("reference_design.toml"), "-o", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let written = fs::read_to_string(&target).unwrap();
    assert!(written.starts_with("exoarm ") && !written.contains("xxxxxxxxxx"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn debounce_does_not_touch_sizing() {
    let dir = tempfile::tempdir().unwrap();
    let a = exoarm(&["size", "-c", &fixture("reference_design.toml")]);
    let path = write_config(dir.path(), "[control]\ndebounce_s = 0.9\n");
    let b = exoarm(&["size", "-c", path.to_str().unwrap()]);
    let body = |o: &Output| stdout(o).lines().skip(2).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&a), body(&b));
    assert_ne!(stdout(&a), stdout(&b), "digest should reflect the changed input");
}

#[test]
fn data_dir_supplies_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bores.txt"), "40\n50\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_exoarm"))
        .args(["size", "-c", &fixture("reference_design.toml")])
        .env("EXOARM_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("selected bore                     40 mm"), "{}", stdout(&out));
}

#[test]
fn in_process_run_matches_binary() {
    let args = ["exoarm", "size", "-c", &fixture("reference_design.toml")];
    assert_eq!(exoarm::cli::run(args), 0);
    assert_eq!(exoarm::cli::run(["exoarm", "size", "-c", "missing.toml"]), 1);
}
