//! Black-box tests of the command line binary: exit codes, output
//! placement, determinism, and the failure paths a caller depends on.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use gravicol::bundled;
use gravicol::scenario::Scenario;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gravicol"))
}

/// Fresh scratch directory, distinct per test so parallel tests never
/// collide.
fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gravicol-test-{}-{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn same_seed_reruns_are_byte_identical() {
    let dir = scratch("rerun");
    let first = dir.join("a.csv");
    let second = dir.join("b.csv");
    for path in [&first, &second] {
        let out = bin()
            .args(["run", "born_d5", "--seed", "42", "--out"])
            .arg(path)
            .output()
            .expect("spawn");
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    }
    let a = fs::read(&first).expect("first table");
    let b = fs::read(&second).expect("second table");
    assert!(!a.is_empty());
    assert_eq!(a, b, "seeded reruns must agree byte for byte");
}

#[test]
fn electron_estimate_row_has_the_expected_magnitude() {
    let dir = scratch("electron");
    let path = dir.join("electron.csv");
    let out = bin()
        .args(["run", "electron_collapse", "--out"])
        .arg(&path)
        .output()
        .expect("spawn");
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let table = fs::read_to_string(&path).expect("table");
    let row = table
        .lines()
        .find(|l| l.contains("tau_seconds") && !l.contains("refined"))
        .expect("tau row");
    let value: f64 = row
        .split(',')
        .nth(3)
        .expect("value cell")
        .parse()
        .expect("number");
    assert!(
        (4e23..1.2e24).contains(&value),
        "collapse time {value:e} outside the expected window"
    );
}

#[test]
fn missing_required_key_is_named_and_exits_two() {
    let dir = scratch("missing");
    let path = dir.join("incomplete.scn");
    fs::write(
        &path,
        "name = incomplete\n\
         kind = estimate\n\
         seed = 1\n\
         target = collapse_time\n\
         constituents = 1\n\
         fraction = 1\n\
         smearing = 386 fm\n\
         displacement = 1 nm\n\
         profile = gaussian\n",
    )
    .expect("write scenario");
    let out = bin().arg("run").arg(&path).output().expect("spawn");
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("mass"), "stderr must name the key: {err}");
}

#[test]
fn invalid_state_vector_exits_four() {
    let dir = scratch("badstate");
    let path = dir.join("lopsided.scn");
    fs::write(
        &path,
        "name = lopsided\n\
         kind = weak_measure\n\
         seed = 5\n\
         state = 0.6 0.7\n\
         q_index = 0\n\
         p = 0.3\n\
         samples = 100\n",
    )
    .expect("write scenario");
    let out = bin().arg("run").arg(&path).output().expect("spawn");
    assert_eq!(out.status.code(), Some(4), "stderr: {}", stderr_of(&out));
}

#[test]
fn stalled_solver_exits_three() {
    let dir = scratch("stall");
    let path = dir.join("stalled.scn");
    fs::write(
        &path,
        "name = stalled\n\
         kind = sn_ground\n\
         seed = 1\n\
         mass = 1 GeV\n\
         coupling = 1\n\
         r_max = 25 GeV^-1\n\
         nodes = 401\n\
         width = 2 GeV^-1\n\
         dtau = 1e-9\n\
         max_iterations = 50\n",
    )
    .expect("write scenario");
    let out = bin().arg("run").arg(&path).output().expect("spawn");
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_of(&out));
}

#[test]
fn unknown_verify_suite_exits_two() {
    let out = bin().args(["verify", "nonsense"]).output().expect("spawn");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("unknown suite"));
}

#[test]
fn perturbed_rates_fail_the_born_suite() {
    let out = bin()
        .args(["verify", "born"])
        .env("GRAVICOL_VERIFY_PERTURB", "1")
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(1));
    let text = stdout_of(&out);
    assert!(text.contains("FAIL"), "stdout: {text}");
    assert!(
        text.contains("alpha2_sq 0.1"),
        "the first failing row must be identified: {text}"
    );
}

#[test]
fn verify_all_passes() {
    let out = bin().args(["verify", "all"]).output().expect("spawn");
    let text = stdout_of(&out);
    assert_eq!(out.status.code(), Some(0), "stdout: {text}");
    assert_eq!(text.matches("PASS").count(), 13, "stdout: {text}");
    assert_eq!(text.matches("FAIL").count(), 0, "stdout: {text}");
}

#[test]
fn out_dir_environment_variable_is_honoured() {
    let dir = scratch("envdir");
    let out = bin()
        .args(["run", "electron_collapse"])
        .env("GRAVICOL_OUT_DIR", &dir)
        .output()
        .expect("spawn");
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(dir.join("electron_collapse.csv").is_file());
}

#[test]
fn multiple_scenarios_run_in_parallel_into_a_directory() {
    let dir = scratch("multi");
    let out = bin()
        .args([
            "run",
            "electron_collapse",
            "nucleus_collapse",
            "--jobs",
            "2",
            "--out",
        ])
        .arg(&dir)
        .output()
        .expect("spawn");
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(dir.join("electron_collapse.csv").is_file());
    assert!(dir.join("nucleus_collapse.csv").is_file());
}

#[test]
fn unknown_input_names_the_culprit() {
    let out = bin()
        .args(["run", "no_such_thing"])
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("no_such_thing"));
}

#[test]
fn serialisation_round_trips_every_bundled_scenario() {
    for (name, text) in bundled::BUNDLED {
        let parsed = Scenario::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let once = parsed.serialize();
        let reparsed = Scenario::parse(&once).unwrap_or_else(|e| panic!("{name} reparse: {e}"));
        assert_eq!(once, reparsed.serialize(), "{name} round trip drifted");
    }
}

#[test]
fn list_scenarios_names_everything() {
    let out = bin().arg("list-scenarios").output().expect("spawn");
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    for (name, _) in bundled::BUNDLED {
        assert!(text.contains(name), "missing {name} in listing");
    }
}
