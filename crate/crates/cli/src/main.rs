use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fneighbors::generate::MapKind;
use fneighbors::pipeline::{export_artifacts, run_pipeline, DeltaSpec, GeneratorSpec, RunConfig, RunReport, Stage};
use fneighbors::Error;

#[derive(Parser)]
#[command(name = "fneighbors", version, about = "Complexes of f-neighbors for convex polyhedra mapped to the plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the mesh and the general position of the map.
    Validate(Options),
    /// Build the image triangulation and the induced triangulation.
    Triangulate(Options),
    /// Build the complex of f-neighbors and its resolution.
    Complex(Options),
    /// Estimate the center and find an equivariant pair.
    Hopf(Options),
    /// Extract level sets and check separation.
    Levelset(Options),
    /// Run every stage.
    All(Options),
}

#[derive(Args)]
struct Options {
    /// TOML config; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Closed triangulated surface (OFF or OBJ).
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Vertex images: JSON `{"images": [[u, v], ...]}` or `k u v` lines.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Generate the map (and, without --mesh, the mesh): projection | random-images.
    #[arg(long = "gen", value_name = "KIND")]
    generator: Option<MapKind>,
    /// Seed for generation and center sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Points for a generated hull.
    #[arg(long)]
    points: Option<usize>,
    /// Levels, absolute (`0.8`) or relative to the estimated min chord (`0.5D`). Repeat or comma-separate.
    #[arg(long, value_delimiter = ',')]
    delta: Vec<DeltaSpec>,
    /// Extract no level sets.
    #[arg(long, conflicts_with = "delta")]
    no_delta: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write SVG drawings.
    #[arg(long)]
    svg: bool,
    /// Write OBJ surfaces.
    #[arg(long)]
    obj: bool,
    /// Write JSON reports (on by default).
    #[arg(long, overrides_with = "no_report")]
    report: bool,
    #[arg(long)]
    no_report: bool,
    #[arg(long)]
    tol_residual: Option<f64>,
    #[arg(long)]
    tol_level: Option<f64>,
    #[arg(long)]
    max_depth: Option<u32>,
    /// Samples for the brute-force oracle check.
    #[arg(long)]
    oracle: Option<usize>,
    /// Print the full JSON report instead of the summary.
    #[arg(long)]
    json: bool,
}

impl Options {
    fn into_config(self) -> Result<(RunConfig, bool), Error> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.mesh {
            config.mesh = Some(p);
        }
        if let Some(p) = self.map {
            config.map = Some(p);
        }
        if let Some(kind) = self.generator {
            let previous = config.generator.take();
            config.generator = Some(GeneratorSpec {
                kind,
                seed: previous.as_ref().map_or(0, |g| g.seed),
                points: previous.as_ref().map_or(20, |g| g.points),
            });
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
            if let Some(g) = config.generator.as_mut() {
                g.seed = seed;
            }
        }
        if let Some(points) = self.points {
            match config.generator.as_mut() {
                Some(g) => g.points = points,
                None => return Err(Error::Config("--points needs a generator".into())),
            }
        }
        if self.no_delta {
            config.deltas.clear();
        } else if !self.delta.is_empty() {
            config.deltas = self.delta;
        }
        if let Some(dir) = self.out_dir {
            config.out_dir = Some(dir);
        }
        config.svg |= self.svg;
        config.obj |= self.obj;
        if self.no_report {
            config.report = false;
        } else if self.report {
            config.report = true;
        }
        if let Some(t) = self.tol_residual {
            config.tol_residual = t;
        }
        if let Some(t) = self.tol_level {
            config.tol_level = Some(t);
        }
        if let Some(d) = self.max_depth {
            config.max_depth = d;
        }
        if let Some(n) = self.oracle {
            config.oracle_samples = n;
        }
        Ok((config, self.json))
    }
}

fn summary(report: &RunReport) -> String {
    let mut lines = Vec::new();
    if let Some(i) = &report.input {
        lines.push(format!("input: {} (V={}, E={}, F={})", i.source, i.vertices, i.edges, i.triangles));
    }
    if let Some(v) = &report.validation {
        lines.push(format!(
            "validation: surface {}, general position {}",
            if v.surface.passed { "ok" } else { "FAILED" },
            if v.general_position.passed { "ok" } else { "FAILED" }
        ));
    }
    if let Some(t) = &report.triangulation {
        lines.push(format!(
            "triangulation: {} points, {} crossings, {} image triangles ({} covered), induced {} vertices / {} triangles",
            t.arrangement_points, t.crossings, t.triangles, t.inside_triangles, t.induced_vertices, t.induced_triangles
        ));
    }
    if let Some(c) = &report.complex {
        lines.push(format!(
            "complex: V={} E={} F={} chi={}, {} diagonal vertices, counting identity {}, edge cases {}",
            c.vertices,
            c.edges,
            c.triangles,
            c.euler,
            c.diagonal_vertices,
            if c.counting_identity { "ok" } else { "FAILED" },
            if c.edge_cases.passed() { "ok" } else { "FAILED" }
        ));
    }
    if let Some(r) = &report.resolution {
        lines.push(format!(
            "resolution: V={} E={} F={}, {} split vertices, base component {}{}",
            r.vertices,
            r.edges,
            r.triangles,
            r.split_vertices,
            r.base.component,
            if r.base.via_fallback { " (fallback)" } else { "" }
        ));
        for c in &r.components {
            lines.push(format!(
                "  component {}: F={} chi={} {} genus={} degree mod 2={}",
                c.id,
                c.triangles,
                c.euler,
                if c.orientable { "orientable" } else { "non-orientable" },
                c.genus.map_or("-".to_string(), |g| g.to_string()),
                c.degree_mod2
            ));
        }
    }
    if let Some(o) = &report.oracle {
        lines.push(format!(
            "oracle: {} ({} samples, {} skipped, {} pairs)",
            if o.passed { "pass" } else { "FAIL" },
            o.samples,
            o.skipped,
            o.preimage_pairs
        ));
    }
    if let Some(h) = &report.hopf {
        lines.push(format!(
            "hopf: center {:?}, min chord {:.6}, witness residual {:.2e}, |a-b| {:.6}, path of {} points",
            h.center.center,
            h.center.min_chord,
            h.witness.residual,
            h.witness.distance,
            h.witness.path.len()
        ));
    }
    for l in &report.level_sets {
        match &l.error {
            Some(e) => lines.push(format!("level {} ({:.6}): {e}", l.spec, l.delta)),
            None => lines.push(format!(
                "level {} ({:.6}): {} loops ({} closed), below {} / above {}, separated {}",
                l.spec,
                l.delta,
                l.loops.unwrap_or(0),
                l.closed_loops.unwrap_or(0),
                l.below_components.unwrap_or(0),
                l.above_components.unwrap_or(0),
                l.separated.unwrap_or(false)
            )),
        }
    }
    if let Some(f) = &report.failure {
        lines.push(format!("failed in {}: {}", f.stage.name(), f.message));
    }
    lines.join("\n")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, options) = match cli.command {
        Command::Validate(o) => (Stage::Validate, o),
        Command::Triangulate(o) => (Stage::Triangulate, o),
        Command::Complex(o) => (Stage::Complex, o),
        Command::Hopf(o) => (Stage::Hopf, o),
        Command::Levelset(o) | Command::All(o) => (Stage::Levelset, o),
    };
    let (config, json) = match options.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let run = run_pipeline(&config, stage);
    if json {
        println!("{}", run.report.to_json());
    } else {
        println!("{}", summary(&run.report));
    }
    let mut code = run.error.as_ref().map_or(0, |e| e.exit_code());
    match export_artifacts(&run, &config) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if code == 0 {
                code = e.exit_code();
            }
        }
    }
    if let Some(e) = &run.error {
        eprintln!("error: {e}");
    }
    ExitCode::from(code)
}
