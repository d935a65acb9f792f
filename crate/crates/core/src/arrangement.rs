//! Vertex images under the simplicial map and the planar straight-line graph
//! formed by the images of all mesh edges.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use num_traits::Zero;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::{self, orient2d, parse_rational, segment_intersection, Point2, Q, SegmentIntersection};
use crate::mesh::{json_rational, EdgeKey, SurfaceMesh, ValidationReport, Violation};

/// A simplicial map into the plane, given by one exact image per mesh vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarMap {
    pub images: Vec<Point2>,
}

impl PlanarMap {
    pub fn new(images: Vec<Point2>) -> Self {
        PlanarMap { images }
    }

    /// Image of a point given by barycentric weights on a mesh triangle.
    pub fn apply(&self, tri: [usize; 3], weights: &[Q; 3]) -> Point2 {
        exact::combine2(weights, [&self.images[tri[0]], &self.images[tri[1]], &self.images[tri[2]]])
    }

    pub fn to_json(&self) -> String {
        let images: Vec<Vec<String>> = self.images.iter().map(|p| vec![p[0].to_string(), p[1].to_string()]).collect();
        serde_json::to_string_pretty(&serde_json::json!({ "images": images })).unwrap_or_default()
    }
}

/// Reads a map file: JSON `{"images": [[u, v], ...]}` or text lines `k u v`.
pub fn load_planar_map(path: impl AsRef<Path>) -> Result<PlanarMap> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_planar_map(&text)
}

pub fn parse_planar_map(text: &str) -> Result<PlanarMap> {
    if text.trim_start().starts_with('{') {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let arr = value
            .get("images")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing \"images\" array".into()))?;
        let images = arr
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let c = p
                    .as_array()
                    .filter(|c| c.len() == 2)
                    .ok_or_else(|| Error::Parse(format!("image {i} must have 2 coordinates")))?;
                Ok([json_rational(&c[0])?, json_rational(&c[1])?])
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(PlanarMap::new(images));
    }
    let mut entries: BTreeMap<usize, Point2> = BTreeMap::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(Error::Parse(format!("map line must be \"k u v\": {line:?}")));
        }
        let k: usize = tokens[0].parse().map_err(|_| Error::Parse(format!("bad vertex index {:?}", tokens[0])))?;
        if entries.insert(k, [parse_rational(tokens[1])?, parse_rational(tokens[2])?]).is_some() {
            return Err(Error::Parse(format!("vertex {k} mapped twice")));
        }
    }
    let n = entries.len();
    if entries.keys().copied().ne(0..n) {
        return Err(Error::Parse("map lines must cover vertex indices 0..n exactly once".into()));
    }
    Ok(PlanarMap::new(entries.into_values().collect()))
}

/// Passes iff every triple of vertex images is non-collinear (exact).
pub fn check_general_position(mesh: &SurfaceMesh, map: &PlanarMap) -> ValidationReport {
    let mut violations = Vec::new();
    if map.images.len() != mesh.vertices.len() {
        violations.push(Violation {
            code: "image-count".into(),
            simplex: vec![],
            message: format!("{} images for {} mesh vertices", map.images.len(), mesh.vertices.len()),
        });
        return ValidationReport::from_violations(violations);
    }
    let p = &map.images;
    let n = p.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if orient2d(&p[i], &p[j], &p[k]) == 0 {
                    let message = if p[i] == p[j] || p[j] == p[k] || p[i] == p[k] {
                        format!("coincident vertex images among ({i}, {j}, {k})")
                    } else {
                        format!("vertex images ({i}, {j}, {k}) are collinear")
                    };
                    violations.push(Violation { code: "collinear-images".into(), simplex: vec![i, j, k], message });
                }
            }
        }
    }
    ValidationReport::from_violations(violations)
}

/// Where an arrangement point comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// Image of a mesh vertex.
    VertexImage(usize),
    /// Crossing of the images of the listed pairs of mesh edges.
    Crossing(Vec<(EdgeKey, EdgeKey)>),
}

/// One piece of a subdivided edge image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub a: usize,
    pub b: usize,
    pub mesh_edge: EdgeKey,
}

/// Planar straight-line graph of all mesh-edge images.
#[derive(Debug, Clone)]
pub struct ImagePslg {
    pub points: Vec<Point2>,
    pub provenance: Vec<Provenance>,
    pub constraints: Vec<Constraint>,
    /// Arrangement points along each mesh edge's image, ordered from its smaller endpoint.
    pub edge_points: BTreeMap<EdgeKey, Vec<usize>>,
}

impl ImagePslg {
    pub fn num_crossings(&self) -> usize {
        self.provenance.iter().filter(|p| matches!(p, Provenance::Crossing(_))).count()
    }
}

/// Builds the arrangement of edge images with all-pairs exact intersection.
pub fn build_pslg(mesh: &SurfaceMesh, map: &PlanarMap) -> Result<ImagePslg> {
    if map.images.len() != mesh.vertices.len() {
        return Err(Error::Validation(format!(
            "{} images for {} mesh vertices",
            map.images.len(),
            mesh.vertices.len()
        )));
    }
    let mut points: Vec<Point2> = map.images.clone();
    let mut provenance: Vec<Provenance> = (0..points.len()).map(Provenance::VertexImage).collect();
    let mut index: HashMap<Point2, usize> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        if index.insert(p.clone(), i).is_some() {
            return Err(Error::GeneralPosition(format!("vertex image {i} coincides with another")));
        }
    }

    let edges: Vec<EdgeKey> = mesh.edge_table.keys().copied().collect();
    let img = &map.images;
    let mut on_edge: Vec<Vec<usize>> = edges.iter().map(|&(a, b)| vec![a, b]).collect();

    for i in 0..edges.len() {
        let (a, b) = edges[i];
        for j in i + 1..edges.len() {
            let (c, d) = edges[j];
            let shared = a == c || a == d || b == c || b == d;
            match segment_intersection(&img[a], &img[b], &img[c], &img[d]) {
                SegmentIntersection::None => {}
                SegmentIntersection::Overlap => {
                    return Err(Error::GeneralPosition(format!(
                        "images of edges ({a}, {b}) and ({c}, {d}) overlap"
                    )));
                }
                SegmentIntersection::Point(p) => {
                    if shared {
                        continue;
                    }
                    let id = match index.get(&p) {
                        Some(&id) => {
                            if let Provenance::Crossing(pairs) = &mut provenance[id] {
                                pairs.push((edges[i], edges[j]));
                            }
                            id
                        }
                        None => {
                            let id = points.len();
                            points.push(p.clone());
                            provenance.push(Provenance::Crossing(vec![(edges[i], edges[j])]));
                            index.insert(p, id);
                            id
                        }
                    };
                    for e in [i, j] {
                        if !on_edge[e].contains(&id) {
                            on_edge[e].push(id);
                        }
                    }
                }
            }
        }
    }

    let mut constraints = Vec::new();
    let mut edge_points = BTreeMap::new();
    for (e, mut ids) in edges.iter().zip(on_edge) {
        let origin = &img[e.0];
        let dir = exact::sub2(&img[e.1], origin);
        let param = |p: &Point2| -> Q {
            let d = exact::sub2(p, origin);
            &d[0] * &dir[0] + &d[1] * &dir[1]
        };
        ids.sort_by_cached_key(|&id| param(&points[id]));
        for w in ids.windows(2) {
            constraints.push(Constraint { a: w[0], b: w[1], mesh_edge: *e });
        }
        debug_assert!(param(&points[ids[0]]).is_zero());
        edge_points.insert(*e, ids);
    }

    Ok(ImagePslg { points, provenance, constraints, edge_points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;
    use crate::mesh::parse_off;

    fn tetra() -> SurfaceMesh {
        parse_off("OFF\n4 4 6\n0 0 0\n4 0 0\n0 4 0\n1 1 4\n3 0 2 1\n3 0 1 3\n3 1 2 3\n3 2 0 3\n").unwrap()
    }

    fn map(pts: &[(i64, i64)]) -> PlanarMap {
        PlanarMap::new(pts.iter().map(|&(x, y)| [q(x), q(y)]).collect())
    }

    #[test]
    fn tetra_projection_is_in_general_position() {
        let r = check_general_position(&tetra(), &map(&[(0, 0), (4, 0), (0, 4), (1, 1)]));
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn collinear_triple_is_named() {
        let r = check_general_position(&tetra(), &map(&[(0, 0), (1, 1), (2, 2), (5, 0)]));
        assert!(!r.passed);
        assert_eq!(r.violations[0].simplex, vec![0, 1, 2]);
    }

    #[test]
    fn coincident_images_violate() {
        let r = check_general_position(&tetra(), &map(&[(0, 0), (0, 0), (2, 3), (5, 0)]));
        assert!(!r.passed);
        assert!(r.violations[0].message.contains("coincident"));
    }

    #[test]
    fn tetra_pslg_has_no_crossings() {
        let pslg = build_pslg(&tetra(), &map(&[(0, 0), (4, 0), (0, 4), (1, 1)])).unwrap();
        assert_eq!(pslg.points.len(), 4);
        assert_eq!(pslg.constraints.len(), 6);
        assert_eq!(pslg.num_crossings(), 0);
    }

    #[test]
    fn crossing_diagonals_split_both_edges() {
        // Tetrahedron whose images form a square: edges (0,2) and (1,3) cross at (1,1).
        let pslg = build_pslg(&tetra(), &map(&[(0, 0), (2, 0), (2, 2), (0, 2)])).unwrap();
        assert_eq!(pslg.points.len(), 5);
        assert_eq!(pslg.points[4], [q(1), q(1)]);
        assert_eq!(pslg.provenance[4], Provenance::Crossing(vec![((0, 2), (1, 3))]));
        assert_eq!(pslg.edge_points[&(0, 2)], vec![0, 4, 2]);
        assert_eq!(pslg.edge_points[&(1, 3)], vec![1, 4, 3]);
        assert_eq!(pslg.constraints.len(), 8);
    }

    #[test]
    fn text_map_format() {
        let m = parse_planar_map("1 4 0\n0 0 0\n# comment\n2 0 4\n3 1 1\n").unwrap();
        assert_eq!(m.images[1], [q(4), q(0)]);
        assert!(parse_planar_map("0 0 0\n2 1 1\n").is_err());
        let m = parse_planar_map(r#"{"images": [[0, 0.5], ["1/3", 2]]}"#).unwrap();
        assert_eq!(m.images[1][0], crate::exact::q_frac(1, 3));
    }
}
