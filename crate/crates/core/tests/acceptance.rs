//! Acceptance suite: one pass/fail line per criterion over the seeded instances
//! and the fixtures.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use fneighbors::generate::MapKind;
use fneighbors::pipeline::{run_pipeline, GeneratorSpec, Run, RunConfig, Stage};

const ORACLE_SAMPLES: usize = 10_000;

/// (kind, seed, hull points), run through every stage. Random images of large
/// hulls give complexes with hundreds of thousands of triangles, so for full runs
/// those hulls stay at 16 points or fewer.
const INSTANCES: [(MapKind, u64, usize); 25] = [
    (MapKind::Projection, 1, 8),
    (MapKind::RandomImages, 2, 8),
    (MapKind::Projection, 3, 10),
    (MapKind::RandomImages, 4, 9),
    (MapKind::Projection, 5, 12),
    (MapKind::RandomImages, 6, 10),
    (MapKind::Projection, 7, 15),
    (MapKind::RandomImages, 8, 11),
    (MapKind::Projection, 9, 18),
    (MapKind::RandomImages, 10, 12),
    (MapKind::Projection, 11, 20),
    (MapKind::RandomImages, 12, 12),
    (MapKind::Projection, 13, 23),
    (MapKind::RandomImages, 14, 13),
    (MapKind::Projection, 15, 26),
    (MapKind::RandomImages, 16, 14),
    (MapKind::Projection, 17, 29),
    (MapKind::RandomImages, 18, 14),
    (MapKind::Projection, 19, 32),
    (MapKind::RandomImages, 20, 15),
    (MapKind::Projection, 21, 35),
    (MapKind::RandomImages, 22, 16),
    (MapKind::Projection, 23, 38),
    (MapKind::RandomImages, 24, 16),
    (MapKind::Projection, 25, 40),
];

/// Random-images hulls checked only up to the complex and its resolution.
const LARGE: [(u64, usize); 6] = [(26, 20), (27, 24), (28, 28), (29, 32), (30, 36), (31, 40)];

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn instance_config(kind: MapKind, seed: u64, points: usize) -> RunConfig {
    RunConfig {
        generator: Some(GeneratorSpec { kind, seed, points }),
        seed,
        oracle_samples: ORACLE_SAMPLES,
        ..RunConfig::default()
    }
}

const COMPLEX_STAGES: [&str; 9] =
    ["load", "validate", "arrangement", "cdt", "cdt_restrict", "cdt_check", "induced", "induced_check", "complex"];

/// Wall-clock milliseconds from loading through the edge-manifold check of the complex.
fn complex_stage_ms(run: &Run) -> f64 {
    let timings = run.report.timings_ms.as_ref().unwrap();
    COMPLEX_STAGES.iter().filter_map(|k| timings.get(*k)).sum()
}

#[derive(Default)]
struct Tally {
    failures: Vec<String>,
    checked: usize,
}

/// Writes past the test harness capture so the summary shows in plain `cargo test` output.
fn say(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn line(&self, n: usize, title: &str) -> bool {
        if self.failures.is_empty() {
            say(&format!("criterion {n}: PASS  {title} ({} checks)", self.checked));
        } else {
            say(&format!("criterion {n}: FAIL  {title} ({} of {} checks failed)", self.failures.len(), self.checked));
            for f in self.failures.iter().take(10) {
                say(&format!("    {f}"));
            }
        }
        self.failures.is_empty()
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn tetrahedron_counts(t: &mut Tally) {
    let cfg = RunConfig {
        mesh: Some(fixture("tetrahedron.off")),
        map: Some(fixture("tetrahedron.map")),
        ..RunConfig::default()
    };
    let run = run_pipeline(&cfg, Stage::Complex);
    t.check(run.ok(), || format!("tetrahedron run failed: {:?}", run.error));
    let (Some(tri), Some(cx), Some(res)) = (&run.report.triangulation, &run.report.complex, &run.report.resolution) else {
        return;
    };
    t.check(tri.inside_triangles == 3, || format!("image triangles {}", tri.inside_triangles));
    t.check(tri.multiplicities.iter().eq([(&2, &3)]), || format!("multiplicities {:?}", tri.multiplicities));
    t.check(tri.induced_triangles == 6, || format!("induced triangles {}", tri.induced_triangles));
    t.check((cx.vertices, cx.edges, cx.triangles) == (5, 9, 6), || format!("V,E,F = {}, {}, {}", cx.vertices, cx.edges, cx.triangles));
    t.check(cx.euler == 2, || format!("chi {}", cx.euler));
    t.check(res.components.len() == 1, || format!("{} components", res.components.len()));
    t.check(res.components.iter().all(|c| c.degree_mod2 == 1), || "degree of j is not 1 mod 2".into());
}

fn torus_fixture(t: &mut Tally) -> bool {
    let (mesh, map) = (fixture("torus.off"), fixture("torus.map"));
    if !mesh.exists() || !map.exists() {
        return false;
    }
    let cfg = RunConfig { mesh: Some(mesh), map: Some(map), ..RunConfig::default() };
    let run = run_pipeline(&cfg, Stage::Complex);
    t.check(run.ok(), || format!("torus run failed: {:?}", run.error));
    if let Some(res) = &run.report.resolution {
        t.check(res.components.len() == 1, || format!("{} components", res.components.len()));
        t.check(res.components.iter().all(|c| c.euler == 0 && c.orientable), || {
            format!("components {:?}", res.components.iter().map(|c| (c.euler, c.orientable)).collect::<Vec<_>>())
        });
    }
    true
}

#[test]
fn acceptance() {
    let mut c1 = Tally::default();
    let mut c3 = Tally::default();
    let mut c4 = Tally::default();
    let mut c5 = Tally::default();
    let mut c6 = Tally::default();
    let mut c7 = Tally::default();
    let mut reports = Vec::new();

    for &(kind, seed, points) in &INSTANCES {
        let tag = format!("{kind} seed {seed}, {points} points");
        let start = Instant::now();
        let run = run_pipeline(&instance_config(kind, seed, points), Stage::Levelset);
        eprintln!("{tag}: {:.1} s", start.elapsed().as_secs_f64());
        let all = [&mut c1, &mut c3, &mut c4, &mut c5, &mut c6, &mut c7];
        if let Some(e) = &run.error {
            for t in all {
                t.check(false, || format!("{tag}: {e}"));
            }
            continue;
        }
        let r = &run.report;
        let cx = r.complex.as_ref().unwrap();
        let ms = complex_stage_ms(&run);
        c1.check(cx.edge_cases.passed(), || format!("{tag}: {:?}", cx.edge_cases.violations.first()));
        c1.check(ms < 10_000.0, || format!("{tag}: {ms:.0} ms through the complex"));

        c3.check(cx.counting_identity && cx.triangles == cx.expected_triangles, || {
            format!("{tag}: {} triangles, sum m(m-1) = {}", cx.triangles, cx.expected_triangles)
        });

        let res = r.resolution.as_ref().unwrap();
        c4.check(res.single_link_cycles, || format!("{tag}: a vertex link is not a single cycle"));
        c4.check(res.swap_involution, || format!("{tag}: swap is not an involution exchanging factors"));

        let hopf = r.hopf.as_ref().unwrap();
        let w = &hopf.witness;
        let p = hopf.center.center;
        c5.check(w.residual <= 1e-6, || format!("{tag}: residual {:e}", w.residual));
        c5.check(w.collinearity <= 1e-5, || format!("{tag}: collinearity {:e}", w.collinearity));
        c5.check(dot(sub(w.a, p), sub(w.b, p)) < 0.0, || format!("{tag}: center not between the pair"));
        c5.check(hopf.path_end_distance == 0.0 && w.path.last().and_then(|x| x.vertex).is_some(), || {
            format!("{tag}: path ends at distance {}", hopf.path_end_distance)
        });

        for l in &r.level_sets {
            c6.check(l.error.is_none(), || format!("{tag} delta {}: {:?}", l.spec, l.error));
            c6.check(l.closed_loops.unwrap_or(0) >= 1, || format!("{tag} delta {}: no closed loop", l.spec));
            c6.check(l.separated == Some(true), || format!("{tag} delta {}: not separated", l.spec));
            c6.check(l.range_check, || format!("{tag}: max lifted distance {} below the estimate", l.max_distance));
        }
        c6.check(r.level_sets.len() == 3, || format!("{tag}: {} levels", r.level_sets.len()));

        let o = r.oracle.as_ref().unwrap();
        c7.check(o.passed && o.samples == ORACLE_SAMPLES, || format!("{tag}: {:?}", o.counterexamples.first()));

        reports.push(((kind, seed, points), r.to_json_deterministic()));
    }

    for &(seed, points) in &LARGE {
        let tag = format!("random-images seed {seed}, {points} points");
        let start = Instant::now();
        let run = run_pipeline(&instance_config(MapKind::RandomImages, seed, points), Stage::Complex);
        eprintln!("{tag}: {:.1} s", start.elapsed().as_secs_f64());
        let (Some(cx), Some(res)) = (&run.report.complex, &run.report.resolution) else {
            for t in [&mut c1, &mut c3, &mut c4] {
                t.check(false, || format!("{tag}: {:?}", run.error));
            }
            continue;
        };
        let ms = complex_stage_ms(&run);
        c1.check(cx.edge_cases.passed(), || format!("{tag}: {:?}", cx.edge_cases.violations.first()));
        c1.check(ms < 10_000.0, || format!("{tag}: {ms:.0} ms through the complex"));
        c3.check(cx.counting_identity && cx.triangles == cx.expected_triangles, || {
            format!("{tag}: {} triangles, sum m(m-1) = {}", cx.triangles, cx.expected_triangles)
        });
        c4.check(res.single_link_cycles && res.swap_involution, || format!("{tag}: resolution checks failed"));
    }

    let mut c2 = Tally::default();
    tetrahedron_counts(&mut c2);

    let mut c8 = Tally::default();
    let torus_present = torus_fixture(&mut c8);

    // Determinism: rerun one instance of each map kind and compare reports byte for byte.
    let mut c9 = Tally::default();
    for kind in [MapKind::Projection, MapKind::RandomImages] {
        if let Some(((k, seed, points), first)) = reports.iter().find(|((k, _, _), _)| *k == kind) {
            let again = run_pipeline(&instance_config(*k, *seed, *points), Stage::Levelset);
            c9.check(again.report.to_json_deterministic() == *first, || format!("{k} seed {seed}: reports differ"));
        }
    }

    let mut ok = true;
    ok &= c1.line(1, "edge-manifold with case labels, under 10 s per instance");
    ok &= c2.line(2, "tetrahedron fixture exact counts");
    ok &= c3.line(3, "counting identity");
    ok &= c4.line(4, "manifold resolution and swap involution");
    ok &= c5.line(5, "equivariant witness and path to the diagonal");
    ok &= c6.line(6, "level sets separate the base component");
    ok &= c7.line(7, "oracle equivalence");
    if torus_present {
        ok &= c8.line(8, "torus fixture");
    } else {
        say("criterion 8: SKIP  torus fixture not present");
    }
    ok &= c9.line(9, "deterministic reports");
    assert!(ok, "acceptance criteria failed");
}
