//! Triangulated convex surfaces: loading, validation and ray casting.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::{self, cross3, orient3d, p3_to_f64, parse_rational, sub3, Point3, Q};

/// Unordered vertex pair, stored with the smaller index first.
pub type EdgeKey = (usize, usize);

pub fn edge_key(a: usize, b: usize) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Closed triangulated surface with exact vertex coordinates.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[usize; 3]>,
    /// Incident triangles per edge; exactly two on a valid closed surface.
    pub edge_table: BTreeMap<EdgeKey, Vec<usize>>,
    /// Every shared edge is traversed in opposite directions by its two triangles.
    pub consistently_wound: bool,
}

impl SurfaceMesh {
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Parse(format!(
                    "triangle {t} references vertex {bad} but only {} vertices exist",
                    vertices.len()
                )));
            }
        }
        let mut edge_table: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if a == b {
                    continue;
                }
                edge_table.entry(edge_key(a, b)).or_default().push(t);
                *directed.entry((a, b)).or_default() += 1;
            }
        }
        let consistently_wound = edge_table.iter().all(|(&(a, b), tris)| {
            tris.len() == 2 && directed.get(&(a, b)) == Some(&1) && directed.get(&(b, a)) == Some(&1)
        });
        Ok(SurfaceMesh { vertices, triangles, edge_table, consistently_wound })
    }

    pub fn num_edges(&self) -> usize {
        self.edge_table.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_table.len() as i64 + self.triangles.len() as i64
    }

    /// Six times the signed enclosed volume; positive for outward winding.
    pub fn signed_volume6(&self) -> Q {
        let origin: Point3 = [Q::zero(), Q::zero(), Q::zero()];
        self.triangles
            .iter()
            .map(|t| exact::orient3d_value(&origin, &self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]))
            .fold(Q::zero(), |acc, v| acc + v)
    }

    /// Flips every triangle if the winding is inward so normals point out of the body.
    pub fn orient_outward(&mut self) {
        if self.signed_volume6().is_negative() {
            for t in &mut self.triangles {
                t.swap(1, 2);
            }
        }
    }

    pub fn centroid_f64(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for v in &self.vertices {
            let p = p3_to_f64(v);
            for k in 0..3 {
                c[k] += p[k];
            }
        }
        let n = self.vertices.len().max(1) as f64;
        c.map(|x| x / n)
    }

    /// Outward face planes in floating point.
    pub fn face_planes(&self) -> FacePlanes {
        FacePlanes::new(self)
    }

    pub fn to_off(&self) -> String {
        let mut s = String::from("OFF\n");
        let _ = writeln!(s, "{} {} {}", self.vertices.len(), self.triangles.len(), self.edge_table.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::json!({
            "vertices": self.vertices.iter().map(|v| v.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "triangles": self.triangles,
        });
        serde_json::to_string_pretty(&value).unwrap_or_default()
    }
}

/// A single validation failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: String,
    pub simplex: Vec<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport { passed: violations.is_empty(), violations }
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn summary(&self) -> String {
        match self.violations.first() {
            None => "passed".to_string(),
            Some(v) => format!("{} violation(s); first: {}", self.violations.len(), v.message),
        }
    }
}

fn violation(code: &str, simplex: Vec<usize>, message: String) -> Violation {
    Violation { code: code.to_string(), simplex, message }
}

/// Checks that the mesh is a closed, orientable, consistently wound, convex triangulated surface.
pub fn validate_surface(mesh: &SurfaceMesh) -> ValidationReport {
    let mut out = Vec::new();
    let verts = &mesh.vertices;

    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = *tri;
        if a == b || b == c || a == c {
            out.push(violation("repeated-vertex", vec![t], format!("triangle {t} repeats a vertex")));
            continue;
        }
        let n = cross3(&sub3(&verts[b], &verts[a]), &sub3(&verts[c], &verts[a]));
        if n.iter().all(Zero::is_zero) {
            out.push(violation("degenerate-triangle", vec![t], format!("triangle {t} has zero area")));
        }
    }

    let mut used = vec![false; verts.len()];
    for tri in &mesh.triangles {
        for &v in tri {
            used[v] = true;
        }
    }
    for (v, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
        out.push(violation("isolated-vertex", vec![v], format!("vertex {v} belongs to no triangle")));
    }

    let mut winding_ok = true;
    for (&(a, b), tris) in &mesh.edge_table {
        match tris.len() {
            1 => out.push(violation("boundary-edge", vec![a, b], format!("boundary edge ({a}, {b})"))),
            2 => {
                let forward = |t: usize| {
                    let tri = mesh.triangles[t];
                    (0..3).any(|k| tri[k] == a && tri[(k + 1) % 3] == b)
                };
                if forward(tris[0]) == forward(tris[1]) {
                    winding_ok = false;
                    out.push(violation(
                        "inconsistent-winding",
                        vec![a, b],
                        format!("triangles {} and {} traverse edge ({a}, {b}) in the same direction", tris[0], tris[1]),
                    ));
                }
            }
            n => out.push(violation(
                "non-manifold-edge",
                vec![a, b],
                format!("edge ({a}, {b}) belongs to {n} triangles"),
            )),
        }
    }

    if out.is_empty() {
        let chi = mesh.euler_characteristic();
        if chi != 2 {
            out.push(violation("euler", vec![], format!("Euler characteristic {chi} is not 2")));
        }
    }

    if winding_ok && out.is_empty() {
        let orientation = if mesh.signed_volume6().is_negative() { -1 } else { 1 };
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let bad = (0..verts.len()).find(|&v| {
                !tri.contains(&v)
                    && orientation * orient3d(&verts[tri[0]], &verts[tri[1]], &verts[tri[2]], &verts[v]) > 0
            });
            if let Some(v) = bad {
                out.push(violation(
                    "non-convex",
                    vec![t, v],
                    format!("non-convex at face {t}: vertex {v} lies outside its plane"),
                ));
            }
        }
    }

    ValidationReport::from_violations(out)
}

/// Reads an OFF or JSON mesh file. JSON is detected by extension or a leading `{`.
pub fn load_surface_mesh(path: impl AsRef<Path>) -> Result<SurfaceMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with('{');
    if is_json {
        parse_mesh_json(&text)
    } else {
        parse_off(&text)
    }
}

pub fn parse_off(text: &str) -> Result<SurfaceMesh> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty OFF file".into()))?;
    let mut header_tokens = header.split_whitespace();
    if header_tokens.next() != Some("OFF") {
        return Err(Error::Parse(format!("expected OFF header, found {header:?}")));
    }
    let rest: Vec<&str> = header_tokens.collect();
    let counts_line = if rest.is_empty() {
        lines.next().ok_or_else(|| Error::Parse("missing counts line".into()))?.to_string()
    } else {
        rest.join(" ")
    };
    let counts: Vec<usize> = counts_line
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad count {t:?}"))))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(Error::Parse(format!("counts line needs vertex and face counts: {counts_line:?}")));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing vertex line {i}")))?;
        let coords: Vec<&str> = line.split_whitespace().collect();
        if coords.len() < 3 {
            return Err(Error::Parse(format!("vertex {i} needs 3 coordinates")));
        }
        vertices.push([parse_rational(coords[0])?, parse_rational(coords[1])?, parse_rational(coords[2])?]);
    }
    let mut triangles = Vec::with_capacity(nf);
    for i in 0..nf {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing face line {i}")))?;
        let tokens: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad face index {t:?}"))))
            .collect::<Result<_>>()?;
        match tokens.first() {
            Some(3) if tokens.len() >= 4 => triangles.push([tokens[1], tokens[2], tokens[3]]),
            Some(3) => return Err(Error::Parse(format!("face {i} is truncated"))),
            _ => return Err(Error::Parse(format!("non-triangular face {i}"))),
        }
    }
    SurfaceMesh::new(vertices, triangles)
}

/// Reads a rational from a JSON number or string without passing through `f64`.
pub(crate) fn json_rational(v: &Value) -> Result<Q> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("expected a number, found {other}"))),
    }
}

pub fn parse_mesh_json(text: &str) -> Result<SurfaceMesh> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let verts = value
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing \"vertices\" array".into()))?;
    let tris = value
        .get("triangles")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing \"triangles\" array".into()))?;
    let mut vertices = Vec::with_capacity(verts.len());
    for (i, v) in verts.iter().enumerate() {
        let c = v.as_array().filter(|c| c.len() == 3).ok_or_else(|| Error::Parse(format!("vertex {i} must have 3 coordinates")))?;
        vertices.push([json_rational(&c[0])?, json_rational(&c[1])?, json_rational(&c[2])?]);
    }
    let mut triangles = Vec::with_capacity(tris.len());
    for (i, t) in tris.iter().enumerate() {
        let idx = t.as_array().ok_or_else(|| Error::Parse(format!("face {i} is not an array")))?;
        if idx.len() != 3 {
            return Err(Error::Parse(format!("non-triangular face {i}")));
        }
        let mut tri = [0usize; 3];
        for (k, x) in idx.iter().enumerate() {
            tri[k] = x.as_u64().ok_or_else(|| Error::Parse(format!("bad index in face {i}")))? as usize;
        }
        triangles.push(tri);
    }
    SurfaceMesh::new(vertices, triangles)
}

/// One intersection of a line with the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayHit {
    pub point: [f64; 3],
    pub triangle: usize,
    /// Signed parameter along the direction from the origin.
    pub t: f64,
}

/// Outward unit normals and offsets of every face, for floating-point queries
/// against the convex body the surface bounds.
#[derive(Debug, Clone)]
pub struct FacePlanes {
    normals: Vec<[f64; 3]>,
    offsets: Vec<f64>,
    scale: f64,
}

impl FacePlanes {
    fn new(mesh: &SurfaceMesh) -> Self {
        let flip = if mesh.signed_volume6().is_negative() { -1.0 } else { 1.0 };
        let verts: Vec<[f64; 3]> = mesh.vertices.iter().map(p3_to_f64).collect();
        let mut normals = Vec::with_capacity(mesh.triangles.len());
        let mut offsets = Vec::with_capacity(mesh.triangles.len());
        for t in &mesh.triangles {
            // The exact normal keeps thin faces well conditioned.
            let n = cross3(&sub3(&mesh.vertices[t[1]], &mesh.vertices[t[0]]), &sub3(&mesh.vertices[t[2]], &mesh.vertices[t[0]]));
            let n = p3_to_f64(&n).map(|x| x * flip);
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            let n = if len > 0.0 { n.map(|x| x / len) } else { n };
            let p = verts[t[0]];
            normals.push(n);
            offsets.push(n[0] * p[0] + n[1] * p[1] + n[2] * p[2]);
        }
        let scale = verts
            .iter()
            .flat_map(|p| p.iter().map(|x| x.abs()))
            .fold(1e-300f64, f64::max);
        FacePlanes { normals, offsets, scale }
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    /// Signed distance to the nearest face plane; negative inside.
    pub fn depth(&self, p: [f64; 3]) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, d)| n[0] * p[0] + n[1] * p[1] + n[2] * p[2] - d)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains_strictly(&self, p: [f64; 3]) -> bool {
        self.depth(p) < -1e-12 * self.scale
    }

    /// Both intersections of the line `origin + t * direction` with the surface,
    /// ordered by `t`. Ties on edges and vertices go to the smallest face index.
    pub fn raycast(&self, origin: [f64; 3], direction: [f64; 3]) -> Result<[RayHit; 2]> {
        if !self.contains_strictly(origin) {
            return Err(Error::OriginNotInterior);
        }
        let dl = (direction[0].powi(2) + direction[1].powi(2) + direction[2].powi(2)).sqrt();
        if dl == 0.0 || !dl.is_finite() {
            return Err(Error::Parse("ray direction must be nonzero".into()));
        }
        let mut exit = (f64::INFINITY, usize::MAX);
        let mut entry = (f64::NEG_INFINITY, usize::MAX);
        let mut exits = Vec::new();
        let mut entries = Vec::new();
        for (i, (n, d)) in self.normals.iter().zip(&self.offsets).enumerate() {
            let nu = n[0] * direction[0] + n[1] * direction[1] + n[2] * direction[2];
            let gap = d - (n[0] * origin[0] + n[1] * origin[1] + n[2] * origin[2]);
            if nu > 0.0 {
                let t = gap / nu;
                exits.push((t, i));
                if t < exit.0 {
                    exit = (t, i);
                }
            } else if nu < 0.0 {
                let t = gap / nu;
                entries.push((t, i));
                if t > entry.0 {
                    entry = (t, i);
                }
            }
        }
        if exit.1 == usize::MAX || entry.1 == usize::MAX {
            return Err(Error::OriginNotInterior);
        }
        let tie = |best: f64, list: &[(f64, usize)]| -> usize {
            let tol = 1e-12 * (best.abs() + self.scale / dl);
            list.iter().filter(|(t, _)| (t - best).abs() <= tol).map(|&(_, i)| i).min().unwrap_or(usize::MAX)
        };
        let exit_tri = tie(exit.0, &exits);
        let entry_tri = tie(entry.0, &entries);
        let at = |t: f64| [origin[0] + t * direction[0], origin[1] + t * direction[1], origin[2] + t * direction[2]];
        Ok([
            RayHit { point: at(entry.0), triangle: entry_tri, t: entry.0 },
            RayHit { point: at(exit.0), triangle: exit_tri, t: exit.0 },
        ])
    }

    /// The other endpoint of the chord through `center` and the surface point `x`.
    pub fn antipode(&self, center: [f64; 3], x: [f64; 3]) -> Result<[f64; 3]> {
        let dir = [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
        let hits = self.raycast(center, dir)?;
        Ok(hits[0].point)
    }
}

/// Both intersections of the full line through `origin` along `direction` with the surface.
pub fn surface_raycast(mesh: &SurfaceMesh, origin: [f64; 3], direction: [f64; 3]) -> Result<Vec<RayHit>> {
    Ok(mesh.face_planes().raycast(origin, direction)?.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra_off() -> &'static str {
        "OFF\n4 4 6\n0 0 0\n4 0 0\n0 4 0\n1 1 4\n3 0 2 1\n3 0 1 3\n3 1 2 3\n3 2 0 3\n"
    }

    #[test]
    fn loads_tetrahedron() {
        let m = parse_off(tetra_off()).unwrap();
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.num_edges(), 6);
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.consistently_wound);
        assert!(validate_surface(&m).passed);
    }

    #[test]
    fn rejects_quad_faces() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        let err = parse_off(text).unwrap_err();
        assert!(err.to_string().contains("non-triangular face"), "{err}");
    }

    #[test]
    fn open_surface_reports_boundary_edges() {
        let text = "OFF\n4 3 0\n0 0 0\n4 0 0\n0 4 0\n1 1 4\n3 0 1 3\n3 1 2 3\n3 2 0 3\n";
        let r = validate_surface(&parse_off(text).unwrap());
        assert!(!r.passed);
        assert!(r.has_code("boundary-edge"));
    }

    #[test]
    fn inconsistent_winding_is_reported() {
        let text = "OFF\n4 4 6\n0 0 0\n4 0 0\n0 4 0\n1 1 4\n3 0 1 2\n3 0 1 3\n3 1 2 3\n3 2 0 3\n";
        let r = validate_surface(&parse_off(text).unwrap());
        assert!(r.has_code("inconsistent-winding"));
    }

    #[test]
    fn non_convex_bipyramid_is_rejected() {
        // Triangle base with an apex above and a second apex pushed up through the base
        // toward the first: the lower cap is dented inward.
        let text = "OFF\n5 6 9\n0 0 0\n4 0 0\n0 4 0\n1 1 4\n1 1 1\n\
                    3 0 1 3\n3 1 2 3\n3 2 0 3\n3 1 0 4\n3 2 1 4\n3 0 2 4\n";
        let m = parse_off(text).unwrap();
        let r = validate_surface(&m);
        assert!(!r.passed);
        assert!(r.has_code("non-convex"), "{r:?}");
    }

    #[test]
    fn json_mesh_reads_decimals_exactly() {
        let text = r#"{"vertices": [[0,0,0],[4,0,0],[0,4,0],[1,1,"0.1"]], "triangles": [[0,2,1],[0,1,3],[1,2,3],[2,0,3]]}"#;
        let m = parse_mesh_json(text).unwrap();
        assert_eq!(m.vertices[3][2], crate::exact::q_frac(1, 10));
        let text = r#"{"vertices": [[0.1,0,0]], "triangles": []}"#;
        assert_eq!(parse_mesh_json(text).unwrap().vertices[0][0], crate::exact::q_frac(1, 10));
    }

    #[test]
    fn raycast_through_tetra_centroid() {
        let m = parse_off(tetra_off()).unwrap();
        let hits = surface_raycast(&m, [1.25, 1.25, 1.0], [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[0].triangle, 0);
        assert!(hits[0].point[2].abs() < 1e-12);
        // Upper hit on the lateral face x + y + ... through (4,0,0),(0,4,0),(1,1,4).
        assert!(hits[1].point[2] > 1.0);
        let err = surface_raycast(&m, [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::OriginNotInterior));
    }
}
