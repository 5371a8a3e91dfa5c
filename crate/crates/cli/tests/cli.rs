use std::path::PathBuf;
use std::process::{Command, Output};

use gva_cli::{explain, load, run_scenario, strip_timing, Overrides};
use gva_core::exec::Exec;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn gva(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gva")).args(args).env_clear().output().expect("gva runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn delta_scenario_exits_zero() {
    let path = scenario("delta_identities");
    let o = gva(&["verify", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("status = \"pass\""));
    assert!(out.contains("[timing]"));
}

#[test]
fn full_pipeline_passes_with_many_families() {
    let r = load(&scenario("sl2_level3_full"), &Overrides::default()).unwrap();
    let o = run_scenario(&r, Exec::Parallel).unwrap();
    let failed: Vec<_> = o.entries.iter().filter(|e| !e.report.passed).map(|e| e.report.summary_line()).collect();
    assert!(failed.is_empty(), "{failed:#?}");
    assert_eq!(o.code, 0);
    let families = o.identity_families();
    let identities = families.iter().filter(|f| !f.starts_with("fault.")).count();
    assert!(identities >= 12, "{families:?}");
    for f in &families {
        assert!(explain::explain(f).is_some(), "no description for {f}");
    }
    // the fault set is part of the run and every fault is detected
    assert!(o.entries.iter().filter(|e| e.family == "faults").count() >= 8);
}

#[test]
fn zero_level_is_a_config_error() {
    let path = scenario("sl2_level3_full");
    let o = gva(&["verify", "--scenario", path.to_str().unwrap(), "--level", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("InvalidLevel"), "{}", stderr(&o));
}

#[test]
fn malformed_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown_check", "name = \"x\"\nchecks = [\"nope\"]\n"),
        ("missing_algebra", "name = \"x\"\nchecks = [\"affine\"]\n"),
        ("bad_rational", "name = \"x\"\nchecks = [\"grading\"]\n[algebra]\nkind = \"sl2\"\nlevel = \"3/0\"\ncutoff = 2\n"),
        ("unknown_generator", "name = \"x\"\ngenerators = [\"phi\"]\nchecks = [\"certify\"]\n[algebra]\nkind = \"sl2\"\nlevel = \"3\"\ncutoff = 2\n"),
        ("small_window", "name = \"x\"\nchecks = [\"delta\"]\n[windows]\ndelta = 2\n"),
        ("unknown_key", "name = \"x\"\nchecks = [\"delta\"]\nfoo = 1\n"),
    ];
    for (name, text) in cases {
        let p = dir.path().join(format!("{name}.toml"));
        std::fs::write(&p, text).unwrap();
        let o = gva(&["verify", "--scenario", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
        assert!(stderr(&o).contains("config error"), "{name}: {}", stderr(&o));
    }
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.toml");
    // a grading whose pairing is not additive modulo 2Z on the sector set
    std::fs::write(
        &p,
        "name = \"x\"\nchecks = [\"grading\"]\n[grading]\nrank = 1\ntorsion = [2]\nsym = [[\"1/2\"]]\n",
    )
    .unwrap();
    let o = gva(&["verify", "--scenario", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("status = \"fail\""));
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("sl2_level3_full");
    let mut texts = Vec::new();
    for (i, jobs) in ["1", "2"].iter().enumerate() {
        let out = dir.path().join(format!("r{i}.toml"));
        let o = gva(&[
            "verify",
            "--scenario",
            path.to_str().unwrap(),
            "--jobs",
            jobs,
            "--report",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        texts.push(std::fs::read_to_string(out).unwrap());
    }
    assert!(texts[0].contains("[timing]"));
    assert_eq!(strip_timing(&texts[0]), strip_timing(&texts[1]));
    assert!(!strip_timing(&texts[0]).contains("_ms"));
}

#[test]
fn environment_overrides_flags() {
    let path = scenario("delta_identities");
    let o = Command::new(env!("CARGO_BIN_EXE_gva"))
        .args(["verify"])
        .env_clear()
        .env("GVA_SCENARIO", &path)
        .env("GVA_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("seed = 11"));
}

#[test]
fn dump_targets() {
    let path = scenario("sl2_level3_full");
    let o = gva(&["dump", "fields", "--scenario", path.to_str().unwrap(), "--cutoff", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("# psi(e) on"));
    let o = gva(&["dump", "spectrum", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown dump target"));
}

#[test]
fn explain_describes_checks() {
    let o = gva(&["explain", "psi.double_zero[e,f]"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("(z1-z2)^2"));
    let o = gva(&["explain", "fault.c_sign"]);
    assert_eq!(o.status.code(), Some(0));
    let o = gva(&["explain", "no.such.check"]);
    assert_eq!(o.status.code(), Some(2));
}
