//! End-to-end orchestration: inputs, stages, the run report, exports and the
//! brute-force oracle.

mod config;
mod export;
mod oracle;

pub use config::{DeltaSpec, GeneratorSpec, RunConfig};
pub use export::export_artifacts;
pub use oracle::{oracle_check, OracleReport};

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arrangement::{build_pslg, check_general_position, load_planar_map, ImagePslg, PlanarMap};
use crate::cdt::{check_tiling, constrained_delaunay, restrict_to_image, ImageTriangulation};
use crate::complex::{
    analyze_components, build_complex, find_base_component, resolve_singularities, verify_edge_manifold, BaseComponent,
    ComponentInfo, EdgeManifoldReport, NeighborComplex, ResolvedComplex,
};
use crate::error::{Error, Result};
use crate::generate::{generate_map, random_hull};
use crate::hopf::{estimate_center, find_equivariant_pair, CenterParams, CenterResult, HopfWitness, WitnessParams};
use crate::induced::{check_refinement, pull_back, InducedTriangulation};
use crate::levelset::{extract_level_set, lift_distance, LevelSetParams, LevelSetResult};
use crate::mesh::{load_surface_mesh, validate_surface, SurfaceMesh, ValidationReport};

/// Pipeline stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Validate,
    Triangulate,
    Complex,
    Hopf,
    Levelset,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Validate => "validate",
            Stage::Triangulate => "triangulate",
            Stage::Complex => "complex",
            Stage::Hopf => "hopf",
            Stage::Levelset => "levelset",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputSummary {
    pub source: String,
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub surface: ValidationReport,
    pub general_position: ValidationReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangulationSummary {
    pub arrangement_points: usize,
    pub crossings: usize,
    pub constraints: usize,
    pub triangles: usize,
    pub inside_triangles: usize,
    /// Number of image triangles per covering multiplicity.
    pub multiplicities: BTreeMap<usize, usize>,
    pub induced_vertices: usize,
    pub induced_triangles: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexSummary {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub euler: i64,
    pub diagonal_vertices: usize,
    /// Sum over image triangles of m (m - 1).
    pub expected_triangles: usize,
    pub counting_identity: bool,
    pub edge_cases: EdgeManifoldReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolutionSummary {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub split_vertices: usize,
    pub single_link_cycles: bool,
    pub swap_involution: bool,
    pub components: Vec<ComponentInfo>,
    pub base: BaseComponent,
}

#[derive(Debug, Clone, Serialize)]
pub struct HopfSummary {
    pub center: CenterResult,
    pub witness: HopfWitness,
    /// |a - b| at the witness is at least the estimated min chord, up to 1e-3 relative.
    pub distance_check: bool,
    pub path_end_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSetSummary {
    pub spec: DeltaSpec,
    pub delta: f64,
    pub max_distance: f64,
    /// The component maximum of the lifted distance reaches the estimated min chord.
    pub range_check: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loops: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_loops: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub below_components: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub above_components: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separated: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbed_vertices: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub stage: Stage,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triangulation: Option<TriangulationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complex: Option<ComplexSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<ResolutionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hopf: Option<HopfSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub level_sets: Vec<LevelSetSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    /// Wall-clock milliseconds per stage; the only nondeterministic field.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl RunReport {
    fn new(config: &RunConfig) -> Self {
        RunReport {
            config: config.clone(),
            input: None,
            validation: None,
            triangulation: None,
            complex: None,
            resolution: None,
            oracle: None,
            hopf: None,
            level_sets: Vec::new(),
            failure: None,
            timings_ms: Some(BTreeMap::new()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without timings, byte-identical across runs of the same config.
    pub fn to_json_deterministic(&self) -> String {
        let mut copy = self.clone();
        copy.timings_ms = None;
        copy.to_json()
    }
}

/// In-memory results of each stage that ran.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub mesh: Option<SurfaceMesh>,
    pub map: Option<PlanarMap>,
    pub pslg: Option<ImagePslg>,
    pub triangulation: Option<ImageTriangulation>,
    pub induced: Option<InducedTriangulation>,
    pub complex: Option<NeighborComplex>,
    pub resolved: Option<ResolvedComplex>,
    pub base: Option<BaseComponent>,
    pub center: Option<CenterResult>,
    pub witness: Option<HopfWitness>,
    pub level_sets: Vec<LevelSetResult>,
}

#[derive(Debug)]
pub struct Run {
    pub report: RunReport,
    pub artifacts: Artifacts,
    pub error: Option<Error>,
}

impl Run {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs every stage up to and including `until`. Errors stop the run; the report
/// keeps what finished.
pub fn run_pipeline(config: &RunConfig, until: Stage) -> Run {
    let mut run = Run { report: RunReport::new(config), artifacts: Artifacts::default(), error: None };
    let mut current = Stage::Validate;
    let outcome = config.validate().and_then(|_| execute(config, until, &mut run, &mut current));
    if let Err(e) = outcome {
        let e = match e {
            Error::Stage { .. } => e,
            other => other.in_stage(current.name()),
        };
        run.report.failure = Some(Failure { stage: current, message: e.root().to_string() });
        run.error = Some(e);
    }
    run
}

fn timed<T>(report: &mut RunReport, name: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    if let Some(t) = report.timings_ms.as_mut() {
        *t.entry(name.to_string()).or_default() += start.elapsed().as_secs_f64() * 1e3;
    }
    out
}

fn load_inputs(config: &RunConfig) -> Result<(SurfaceMesh, PlanarMap, String)> {
    let (mesh, source) = match (&config.mesh, &config.generator) {
        (Some(path), _) => (load_surface_mesh(path)?, path.display().to_string()),
        (None, Some(g)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            (random_hull(g.points, &mut rng)?, format!("hull of {} points, seed {}", g.points, g.seed))
        }
        (None, None) => return Err(Error::Config("no mesh source".into())),
    };
    let map = match (&config.map, &config.generator) {
        (Some(path), _) => load_planar_map(path)?,
        (None, Some(g)) => generate_map(&mesh, g.kind, g.seed)?,
        (None, None) => return Err(Error::Config("no map source".into())),
    };
    if map.images.len() != mesh.vertices.len() {
        return Err(Error::Validation(format!(
            "map has {} images for {} vertices",
            map.images.len(),
            mesh.vertices.len()
        )));
    }
    Ok((mesh, map, source))
}

fn execute(config: &RunConfig, until: Stage, run: &mut Run, current: &mut Stage) -> Result<()> {
    let report = &mut run.report;
    let art = &mut run.artifacts;

    *current = Stage::Validate;
    let (mesh, map, source) = timed(report, "load", || load_inputs(config))?;
    report.input = Some(InputSummary {
        source,
        vertices: mesh.vertices.len(),
        edges: mesh.num_edges(),
        triangles: mesh.triangles.len(),
    });
    let surface = timed(report, "validate", || validate_surface(&mesh));
    let general_position = timed(report, "validate", || check_general_position(&mesh, &map));
    report.validation = Some(ValidationSummary { surface: surface.clone(), general_position: general_position.clone() });
    art.mesh = Some(mesh);
    art.map = Some(map);
    if !surface.passed {
        return Err(Error::Validation(surface.summary()));
    }
    if let Some(v) = general_position.violations.first() {
        return Err(Error::GeneralPosition(format!("{} {:?}", v.message, v.simplex)));
    }
    if until == Stage::Validate {
        return Ok(());
    }
    let mesh = art.mesh.as_ref().unwrap();
    let map = art.map.as_ref().unwrap();

    *current = Stage::Triangulate;
    let pslg = timed(report, "arrangement", || build_pslg(mesh, map))?;
    let tri = timed(report, "cdt", || constrained_delaunay(&pslg))?;
    let tri = timed(report, "cdt_restrict", || restrict_to_image(tri, mesh, map));
    timed(report, "cdt_check", || check_tiling(&tri))?;
    let ind = timed(report, "induced", || pull_back(&tri, mesh, map))?;
    timed(report, "induced_check", || check_refinement(&ind, &tri, mesh, map))?;
    let mut multiplicities = BTreeMap::new();
    for t in tri.inside_triangles() {
        *multiplicities.entry(tri.multiplicity(t)).or_insert(0) += 1;
    }
    report.triangulation = Some(TriangulationSummary {
        arrangement_points: pslg.points.len(),
        crossings: pslg.num_crossings(),
        constraints: pslg.constraints.len(),
        triangles: tri.triangles.len(),
        inside_triangles: tri.inside_triangles().count(),
        multiplicities,
        induced_vertices: ind.vertices.len(),
        induced_triangles: ind.triangles.len(),
    });
    art.pslg = Some(pslg);
    art.triangulation = Some(tri);
    art.induced = Some(ind);
    if until == Stage::Triangulate {
        return Ok(());
    }
    let tri = art.triangulation.as_ref().unwrap();
    let ind = art.induced.as_ref().unwrap();

    *current = Stage::Complex;
    let cx = timed(report, "complex", || build_complex(ind, tri));
    let lemma = timed(report, "complex", || verify_edge_manifold(&cx, ind));
    let expected: usize = tri.inside_triangles().map(|t| tri.multiplicity(t) * (tri.multiplicity(t) - 1)).sum();
    report.complex = Some(ComplexSummary {
        vertices: cx.vertices.len(),
        edges: cx.edges.len(),
        triangles: cx.triangles.len(),
        euler: cx.euler_characteristic(),
        diagonal_vertices: cx.diagonal.iter().filter(|&&d| d).count(),
        expected_triangles: expected,
        counting_identity: expected == cx.triangles.len(),
        edge_cases: lemma.clone(),
    });
    if !lemma.passed() {
        art.complex = Some(cx);
        let first = &lemma.violations[0];
        return Err(Error::Topology(format!("edge {:?}: {}", first.edge, first.message)));
    }
    let rc = timed(report, "resolution", || resolve_singularities(&cx))?;
    let components = timed(report, "resolution", || analyze_components(&rc));
    let single_link_cycles = rc.link_cycle_counts().iter().all(|&c| c == 1);
    let swap_involution = (0..rc.triangles.len()).all(|t| {
        let s = rc.swap_triangle[t];
        rc.swap_triangle[s] == t
            && rc.factors[s].first == rc.factors[t].second
            && rc.factors[s].second == rc.factors[t].first
    }) && (0..rc.vertices.len()).all(|v| rc.swap_vertex[rc.swap_vertex[v]] == v);
    if config.oracle_samples > 0 {
        let oracle = timed(report, "oracle", || oracle_check(mesh, map, ind, &cx, config.oracle_samples, config.seed));
        report.oracle = Some(oracle);
    }
    let base = find_base_component(&rc, &components, ind, tri);
    art.complex = Some(cx);
    let base = base?;
    report.resolution = Some(ResolutionSummary {
        vertices: rc.vertices.len(),
        edges: rc.edges.len(),
        triangles: rc.triangles.len(),
        split_vertices: rc.split_vertices(),
        single_link_cycles,
        swap_involution,
        components,
        base: base.clone(),
    });
    art.resolved = Some(rc);
    art.base = Some(base);
    if until == Stage::Complex {
        return Ok(());
    }
    let rc = art.resolved.as_ref().unwrap();
    let base = art.base.as_ref().unwrap().component;

    *current = Stage::Hopf;
    let extra: Vec<[f64; 3]> = (0..ind.vertices.len()).map(|v| ind.vertex_f64(v)).collect();
    let center_params = CenterParams { seed: config.seed, ..CenterParams::default() };
    let center = timed(report, "center", || estimate_center(mesh, &extra, &center_params))?;
    let witness_params = WitnessParams { tolerance: config.tol_residual, ..WitnessParams::default() };
    let witness = timed(report, "witness", || find_equivariant_pair(rc, base, center.center, &witness_params))?;
    let last = witness.path.last().expect("path is never empty");
    let path_end_distance = ((0..3).map(|i| (last.a[i] - last.b[i]).powi(2)).sum::<f64>()).sqrt();
    report.hopf = Some(HopfSummary {
        center: center.clone(),
        distance_check: witness.distance >= center.min_chord * (1.0 - 1e-3),
        witness: witness.clone(),
        path_end_distance,
    });
    art.center = Some(center);
    art.witness = Some(witness);
    if until == Stage::Hopf {
        return Ok(());
    }
    let d_hat = art.center.as_ref().unwrap().min_chord;

    *current = Stage::Levelset;
    let field = lift_distance(rc);
    let max_distance = field.component_max[base];
    let params = LevelSetParams {
        max_depth: config.max_depth,
        ..LevelSetParams::new(config.tol_level.unwrap_or(1e-4 * d_hat))
    };
    for spec in &config.deltas {
        let delta = spec.resolve(d_hat);
        let mut summary = LevelSetSummary {
            spec: *spec,
            delta,
            max_distance,
            range_check: max_distance >= d_hat * (1.0 - 1e-3),
            loops: None,
            closed_loops: None,
            total_length: None,
            below_components: None,
            above_components: None,
            separated: None,
            depth: None,
            perturbed_vertices: None,
            max_deviation: None,
            error: None,
        };
        match timed(report, "levelset", || extract_level_set(rc, base, delta, &params)) {
            Ok(r) => {
                summary.loops = Some(r.total_loop_count);
                summary.closed_loops = Some(r.loops.iter().filter(|l| l.closed).count());
                summary.total_length = Some(r.total_length());
                summary.below_components = Some(r.below_components);
                summary.above_components = Some(r.above_components);
                summary.separated = Some(r.separated);
                summary.depth = Some(r.depth);
                summary.perturbed_vertices = Some(r.perturbed_vertices);
                summary.max_deviation = Some(r.max_deviation);
                art.level_sets.push(r);
            }
            Err(e) => summary.error = Some(e.to_string()),
        }
        report.level_sets.push(summary);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::MapKind;

    #[test]
    fn generated_instance_runs_end_to_end() {
        let config = RunConfig {
            generator: Some(GeneratorSpec { kind: MapKind::RandomImages, seed: 7, points: 20 }),
            ..RunConfig::default()
        };
        let run = run_pipeline(&config, Stage::Levelset);
        assert!(run.ok(), "{:?}", run.error);
        let cx = run.report.complex.as_ref().unwrap();
        assert!(cx.counting_identity);
        assert!(cx.edge_cases.passed());
        let again = run_pipeline(&config, Stage::Levelset);
        assert_eq!(run.report.to_json_deterministic(), again.report.to_json_deterministic());
    }

    #[test]
    fn missing_source_is_a_config_error() {
        let run = run_pipeline(&RunConfig::default(), Stage::Validate);
        assert_eq!(run.error.unwrap().exit_code(), 1);
    }
}
