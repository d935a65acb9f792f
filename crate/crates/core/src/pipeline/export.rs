use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::{Run, RunConfig};
use crate::cdt::ImageTriangulation;
use crate::complex::ResolvedComplex;
use crate::error::{Error, Result};
use crate::exact::p2_to_f64;
use crate::induced::InducedTriangulation;
use crate::levelset::LevelSetResult;

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Distinct color per image triangle, shared by everything over it.
fn color(class: usize) -> [f64; 3] {
    let h = (class as f64 * 0.618_033_988_749_895).fract();
    let (s, v) = (0.55, 0.92);
    let i = (h * 6.0).floor();
    let f = h * 6.0 - i;
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - f * s), v * (1.0 - (1.0 - f) * s));
    match i as i32 % 6 {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

fn hex(c: [f64; 3]) -> String {
    let b = c.map(|x| (x * 255.0).round() as u8);
    format!("#{:02x}{:02x}{:02x}", b[0], b[1], b[2])
}

struct Frame {
    min: [f64; 2],
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(points: &[[f64; 2]]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
        let scale = 760.0 / span;
        Frame { min: lo, scale, height: (hi[1] - lo[1]) * scale + 40.0 }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (20.0 + (p[0] - self.min[0]) * self.scale, self.height - 20.0 - (p[1] - self.min[1]) * self.scale)
    }

    fn header(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"{h:.0}\" viewBox=\"0 0 800 {h:.0}\">\n",
            h = self.height
        )
    }
}

fn triangulation_svg(tri: &ImageTriangulation, outline_only: bool) -> (Frame, String) {
    let pts: Vec<[f64; 2]> = tri.points.iter().map(p2_to_f64).collect();
    let frame = Frame::new(&pts);
    let mut s = String::new();
    for (t, corners) in tri.triangles.iter().enumerate() {
        let poly: Vec<String> = corners
            .iter()
            .map(|&v| {
                let (x, y) = frame.map(pts[v]);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let inside = tri.inside.get(t).copied().unwrap_or(false);
        let fill = if outline_only || !inside { "none".to_string() } else { hex(color(t)) };
        let _ = writeln!(
            s,
            "  <polygon points=\"{}\" fill=\"{fill}\" stroke=\"#999\" stroke-width=\"0.5\"><title>triangle {t}, covered {} times</title></polygon>",
            poly.join(" "),
            tri.multiplicity(t)
        );
    }
    for &(a, b) in &tri.constraint_edges {
        let (x1, y1) = frame.map(pts[a]);
        let (x2, y2) = frame.map(pts[b]);
        let _ = writeln!(s, "  <line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"#222\" stroke-width=\"1\"/>");
    }
    (frame, s)
}

/// The image triangulation, each covered triangle in the color of its class.
pub fn image_triangulation_svg(tri: &ImageTriangulation) -> String {
    let (frame, body) = triangulation_svg(tri, false);
    format!("{}{}</svg>\n", frame.header(), body)
}

/// Induced triangulation as OBJ, with one material per image triangle.
pub fn induced_obj(ind: &InducedTriangulation, mtl_name: &str) -> String {
    let mut s = format!("mtllib {mtl_name}\n");
    for v in 0..ind.vertices.len() {
        let p = ind.vertex_f64(v);
        let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
    }
    let mut order: Vec<usize> = (0..ind.triangles.len()).collect();
    order.sort_by_key(|&t| (ind.image_triangle[t], t));
    let mut current = usize::MAX;
    for t in order {
        if ind.image_triangle[t] != current {
            current = ind.image_triangle[t];
            let _ = writeln!(s, "usemtl image{current}");
        }
        let c = ind.triangles[t];
        let _ = writeln!(s, "f {} {} {}", c[0] + 1, c[1] + 1, c[2] + 1);
    }
    s
}

pub fn induced_mtl(ind: &InducedTriangulation) -> String {
    let mut classes: Vec<usize> = ind.image_triangle.clone();
    classes.sort_unstable();
    classes.dedup();
    let mut s = String::new();
    for c in classes {
        let k = color(c);
        let _ = writeln!(s, "newmtl image{c}\nKd {:.4} {:.4} {:.4}\n", k[0], k[1], k[2]);
    }
    s
}

/// One factor of the resolved complex as a surface in space (0 for a, 1 for b).
pub fn resolved_projection_obj(rc: &ResolvedComplex, factor: usize) -> String {
    let mut s = String::new();
    for &(a, b) in &rc.coords {
        let p = if factor == 0 { a } else { b };
        let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
    }
    let mut current = usize::MAX;
    for (t, c) in rc.triangles.iter().enumerate() {
        if rc.component[t] != current {
            current = rc.component[t];
            let _ = writeln!(s, "g component{current}");
        }
        let _ = writeln!(s, "f {} {} {}", c[0] + 1, c[1] + 1, c[2] + 1);
    }
    s
}

pub fn complex_json(rc: &ResolvedComplex) -> String {
    let value = json!({
        "vertices": rc.vertices.iter().zip(&rc.coords).map(|(v, (a, b))| json!({
            "base": v.base, "cycle": v.cycle, "a": a, "b": b,
        })).collect::<Vec<_>>(),
        "triangles": rc.triangles.iter().zip(&rc.factors).enumerate().map(|(t, (c, f))| json!({
            "corners": c, "first": f.first, "second": f.second, "image": f.image,
            "neighbors": rc.neighbors[t], "component": rc.component[t], "swap": rc.swap_triangle[t],
        })).collect::<Vec<_>>(),
        "edges": rc.edges.iter().map(|(e, t)| json!({ "edge": [e.0, e.1], "triangles": t })).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&value).expect("complex serializes")
}

/// Image point of the first factor at a loop point.
fn loop_image(rc: &ResolvedComplex, ind: &InducedTriangulation, tri: &ImageTriangulation, t: usize, w: [f64; 3]) -> [f64; 2] {
    let first = ind.triangles[rc.factors[t].first];
    let mut out = [0.0; 2];
    for k in 0..3 {
        let p = p2_to_f64(&tri.points[ind.image_point[first[k]]]);
        out[0] += w[k] * p[0];
        out[1] += w[k] * p[1];
    }
    out
}

pub fn level_set_json(level: &LevelSetResult) -> String {
    serde_json::to_string_pretty(level).expect("level set serializes")
}

/// Loops of a level set drawn over the image plane.
pub fn level_set_svg(level: &LevelSetResult, rc: &ResolvedComplex, ind: &InducedTriangulation, tri: &ImageTriangulation) -> String {
    let (frame, mut body) = triangulation_svg(tri, true);
    for (i, l) in level.loops.iter().enumerate() {
        let pts: Vec<String> = l
            .points
            .iter()
            .map(|p| {
                let (x, y) = frame.map(loop_image(rc, ind, tri, p.triangle, p.weights));
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let tag = if l.closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            body,
            "  <{tag} points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            pts.join(" "),
            hex(color(i + 1))
        );
    }
    format!("{}{}</svg>\n", frame.header(), body)
}

/// Writes the requested artifacts into the output directory and returns their paths.
pub fn export_artifacts(run: &Run, config: &RunConfig) -> Result<Vec<PathBuf>> {
    let Some(dir) = &config.out_dir else { return Ok(Vec::new()) };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let art = &run.artifacts;
    let mut written = Vec::new();
    if config.report {
        write(dir, "report.json", &run.report.to_json(), &mut written)?;
    }
    if let Some(tri) = &art.triangulation {
        if config.svg {
            write(dir, "image_triangulation.svg", &image_triangulation_svg(tri), &mut written)?;
        }
        if let Some(ind) = &art.induced {
            if config.obj {
                write(dir, "induced.obj", &induced_obj(ind, "induced.mtl"), &mut written)?;
                write(dir, "induced.mtl", &induced_mtl(ind), &mut written)?;
            }
            if let Some(rc) = &art.resolved {
                if config.obj {
                    write(dir, "complex_first.obj", &resolved_projection_obj(rc, 0), &mut written)?;
                    write(dir, "complex_second.obj", &resolved_projection_obj(rc, 1), &mut written)?;
                }
                if config.report {
                    write(dir, "complex.json", &complex_json(rc), &mut written)?;
                }
                for (i, level) in art.level_sets.iter().enumerate() {
                    if config.report {
                        write(dir, &format!("levelset_{i}.json"), &level_set_json(level), &mut written)?;
                    }
                    if config.svg {
                        write(dir, &format!("levelset_{i}.svg"), &level_set_svg(level, rc, ind, tri), &mut written)?;
                    }
                }
            }
        }
    }
    Ok(written)
}
