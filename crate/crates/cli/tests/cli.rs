use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fneighbors")).args(args).output().expect("binary runs")
}

fn tetra_args(cmd: &str) -> Vec<String> {
    vec![cmd.into(), "--mesh".into(), fixture("tetrahedron.off"), "--map".into(), fixture("tetrahedron.map")]
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

#[test]
fn validate_succeeds_on_fixture() {
    let out = run(&strs(&tetra_args("validate")));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("general position ok"));
}

#[test]
fn collinear_map_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("bad.map");
    std::fs::write(&map, "0 0 0\n1 4 0\n2 8 0\n3 1 1\n").unwrap();
    let out = run(&["all", "--mesh", &fixture("tetrahedron.off"), "--map", map.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_mesh_is_an_io_error() {
    let out = run(&["triangulate", "--mesh", "/nonexistent/mesh.off", "--map", &fixture("tetrahedron.map")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/mesh.off"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "mesh = {:?}\nmap = {:?}\ndeltas = [\"0.25D\"]\nmax_depth = 5\n",
            fixture("tetrahedron.off"),
            fixture("tetrahedron.map")
        ),
    )
    .unwrap();
    let out = run(&["levelset", "--config", cfg.to_str().unwrap(), "--delta", "0.5D", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["deltas"], serde_json::json!(["0.5D"]));
    assert_eq!(report["config"]["max_depth"], serde_json::json!(5));
    assert_eq!(report["level_sets"][0]["separated"], serde_json::json!(true));
}

#[test]
fn generator_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "all", "--gen", "projection", "--seed", "3", "--points", "10", "--out-dir", out_dir.to_str().unwrap(), "--svg",
        "--delta", "0.5D",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.json", "image_triangulation.svg", "levelset_0.json", "levelset_0.svg"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    assert!(!out_dir.join("induced.obj").exists());
}

#[test]
fn unwritable_output_dir_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let mut args = tetra_args("complex");
    args.extend(["--out-dir".into(), blocker.join("out").to_string_lossy().into_owned()]);
    let out = run(&strs(&args));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_config_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    let out = run(&["all", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
