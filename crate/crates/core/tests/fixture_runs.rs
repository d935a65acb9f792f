use std::path::PathBuf;

use fneighbors::generate::MapKind;
use fneighbors::pipeline::{export_artifacts, run_pipeline, DeltaSpec, GeneratorSpec, RunConfig, Stage};
use fneighbors::Error;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn config(mesh: &str, map: &str) -> RunConfig {
    RunConfig { mesh: Some(fixture(mesh)), map: Some(fixture(map)), ..RunConfig::default() }
}

#[test]
fn tetrahedron_full_run() {
    let cfg = RunConfig { deltas: vec![DeltaSpec::Fraction(0.5)], ..config("tetrahedron.off", "tetrahedron.map") };
    let run = run_pipeline(&cfg, Stage::Levelset);
    assert!(run.ok(), "{:?}", run.error);
    let r = &run.report;

    let tri = r.triangulation.as_ref().unwrap();
    assert_eq!(tri.inside_triangles, 3);
    assert_eq!(tri.multiplicities.get(&2), Some(&3));
    assert_eq!(tri.multiplicities.len(), 1);
    assert_eq!(tri.induced_triangles, 6);
    assert_eq!(tri.induced_vertices, 5);

    let cx = r.complex.as_ref().unwrap();
    assert_eq!((cx.vertices, cx.edges, cx.triangles, cx.euler), (5, 9, 6, 2));
    assert_eq!(cx.diagonal_vertices, 3);
    assert!(cx.counting_identity && cx.edge_cases.passed());
    assert_eq!((cx.edge_cases.diagonal, cx.edge_cases.no_folding, cx.edge_cases.one_folding), (3, 6, 0));

    let res = r.resolution.as_ref().unwrap();
    assert_eq!(res.components.len(), 1);
    assert_eq!(res.components[0].euler, 2);
    assert_eq!(res.components[0].degree_mod2, 1);
    assert!(!res.base.via_fallback);

    let hopf = r.hopf.as_ref().unwrap();
    assert!(hopf.witness.residual <= 1e-6);
    assert!(hopf.witness.path.len() >= 2);
    assert_eq!(hopf.path_end_distance, 0.0);

    let level = &r.level_sets[0];
    assert_eq!(level.separated, Some(true));
    assert!(level.closed_loops.unwrap() >= 1);
}

#[test]
fn octahedron_center_and_sphere() {
    let run = run_pipeline(&config("octahedron.off", "octahedron.map"), Stage::Hopf);
    assert!(run.ok(), "{:?}", run.error);
    let r = &run.report;
    let res = r.resolution.as_ref().unwrap();
    assert_eq!(res.components.len(), 1);
    assert_eq!(res.components[0].genus, Some(0));
    let hopf = r.hopf.as_ref().unwrap();
    let c = hopf.center.center;
    assert!(c.iter().all(|x| x.abs() < 1e-3), "{c:?}");
    assert!((hopf.center.min_chord - 2.0 / 3f64.sqrt()).abs() < 1e-3);
}

#[test]
fn torus_fixture_is_one_torus() {
    let run = run_pipeline(&config("torus.off", "torus.map"), Stage::Levelset);
    assert!(run.ok(), "{:?}", run.error);
    let res = run.report.resolution.as_ref().unwrap();
    assert_eq!(res.components.len(), 1);
    let c = &res.components[0];
    assert_eq!((c.euler, c.orientable, c.genus), (0, true, Some(1)));
    assert!(run.report.level_sets.iter().all(|l| l.separated == Some(true)));
}

#[test]
fn collinear_images_stop_at_general_position() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("collinear.map");
    std::fs::write(&map, "0 0 0\n1 4 0\n2 8 0\n3 1 1\n").unwrap();
    let cfg = RunConfig { map: Some(map), ..config("tetrahedron.off", "tetrahedron.map") };
    let run = run_pipeline(&cfg, Stage::Levelset);
    let err = run.error.as_ref().expect("must fail");
    assert!(matches!(err.root(), Error::GeneralPosition(_)));
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("[0, 1, 2]"), "{err}");
    assert!(run.report.triangulation.is_none());
    assert!(run.report.validation.is_some());
}

#[test]
fn exports_follow_toggles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        out_dir: Some(dir.path().to_path_buf()),
        svg: true,
        obj: true,
        deltas: Vec::new(),
        ..config("tetrahedron.off", "tetrahedron.map")
    };
    let run = run_pipeline(&cfg, Stage::Levelset);
    assert!(run.ok());
    let files = export_artifacts(&run, &cfg).unwrap();
    let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    for expected in ["report.json", "image_triangulation.svg", "induced.obj", "complex_first.obj", "complex.json"] {
        assert!(names.iter().any(|n| n == expected), "missing {expected}");
    }
    assert!(!names.iter().any(|n| n.starts_with("levelset")));

    let svg = std::fs::read_to_string(dir.path().join("image_triangulation.svg")).unwrap();
    assert_eq!(svg.matches("covered 2 times").count(), 3);
    let fills: std::collections::BTreeSet<&str> =
        svg.match_indices("fill=\"#").map(|(i, _)| &svg[i + 6..i + 13]).collect();
    assert_eq!(fills.len(), 3);

    // Every face of the induced OBJ sits under a material of its image class.
    let obj = std::fs::read_to_string(dir.path().join("induced.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("usemtl")).count(), 3);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 6);
}

#[test]
fn unwritable_output_reports_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("not_a_dir");
    std::fs::write(&blocker, "").unwrap();
    let cfg = RunConfig { out_dir: Some(blocker.join("out")), ..config("tetrahedron.off", "tetrahedron.map") };
    let run = run_pipeline(&cfg, Stage::Complex);
    let err = export_artifacts(&run, &cfg).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("not_a_dir"), "{err}");
}

#[test]
fn report_counts_match_artifacts() {
    let cfg = RunConfig {
        generator: Some(GeneratorSpec { kind: MapKind::Projection, seed: 4, points: 14 }),
        deltas: vec![DeltaSpec::Fraction(0.5)],
        ..RunConfig::default()
    };
    let run = run_pipeline(&cfg, Stage::Levelset);
    assert!(run.ok(), "{:?}", run.error);
    let art = &run.artifacts;
    let cx = art.complex.as_ref().unwrap();
    let summary = run.report.complex.as_ref().unwrap();
    assert_eq!(summary.triangles, cx.triangles.len());
    assert_eq!(summary.vertices, cx.vertices.len());
    let ind = art.induced.as_ref().unwrap();
    assert_eq!(run.report.triangulation.as_ref().unwrap().induced_triangles, ind.triangles.len());
    let rc = art.resolved.as_ref().unwrap();
    assert_eq!(run.report.resolution.as_ref().unwrap().triangles, rc.triangles.len());
    assert_eq!(run.report.level_sets[0].loops, Some(art.level_sets[0].total_loop_count));
}
