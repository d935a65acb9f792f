//! The triangulation of the surface induced by the image triangulation: every
//! covered image triangle is pulled back into each mesh triangle that covers it.

use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::arrangement::PlanarMap;
use crate::cdt::ImageTriangulation;
use crate::error::{Error, Result};
use crate::exact::{self, barycentric2, orient2d, Point2, Point3, Q};
use crate::mesh::{edge_key, EdgeKey, SurfaceMesh};

/// Refinement of the surface triangulation whose triangles map bijectively onto
/// image triangles.
#[derive(Debug, Clone)]
pub struct InducedTriangulation {
    pub vertices: Vec<Point3>,
    /// Index of each vertex's image among the image-triangulation points.
    pub image_point: Vec<usize>,
    /// Vertex triples wound like their parent mesh triangle.
    pub triangles: Vec<[usize; 3]>,
    pub parent: Vec<usize>,
    pub image_triangle: Vec<usize>,
    pub adjacency: BTreeMap<EdgeKey, Vec<usize>>,
    /// Induced triangles over each image triangle, in coverer order.
    pub over: Vec<Vec<usize>>,
}

impl InducedTriangulation {
    pub fn vertex_f64(&self, v: usize) -> [f64; 3] {
        exact::p3_to_f64(&self.vertices[v])
    }

    /// The induced triangles sharing an edge with t.
    pub fn edge_neighbors(&self, t: usize) -> Vec<usize> {
        let tri = self.triangles[t];
        (0..3)
            .flat_map(|k| self.adjacency[&edge_key(tri[k], tri[(k + 1) % 3])].iter().copied())
            .filter(|&u| u != t)
            .collect()
    }

    /// The induced triangulation as a plain surface mesh.
    pub fn as_surface_mesh(&self) -> Result<SurfaceMesh> {
        SurfaceMesh::new(self.vertices.clone(), self.triangles.clone())
    }
}

/// Pulls every covered image triangle back through each of its covering mesh triangles.
pub fn pull_back(tri: &ImageTriangulation, mesh: &SurfaceMesh, map: &PlanarMap) -> Result<InducedTriangulation> {
    if !tri.is_restricted() {
        return Err(Error::Topology("image triangulation has not been restricted".into()));
    }
    let parent_orientation: Vec<i32> = mesh
        .triangles
        .iter()
        .map(|t| orient2d(&map.images[t[0]], &map.images[t[1]], &map.images[t[2]]))
        .collect();
    if let Some(bad) = parent_orientation.iter().position(|&o| o == 0) {
        return Err(Error::GeneralPosition(format!("mesh triangle {bad} has a degenerate image")));
    }

    // (image triangle, parent, corner image point ids in parent winding)
    let mut pieces: Vec<(usize, usize, [usize; 3])> = Vec::new();
    for (t, corners) in tri.triangles.iter().enumerate() {
        for &m in &tri.coverers[t] {
            let order = if parent_orientation[m] > 0 { *corners } else { [corners[0], corners[2], corners[1]] };
            pieces.push((t, m, order));
        }
    }
    // Each (image point, parent) preimage is computed once.
    let mut needed: Vec<(usize, usize)> = pieces.iter().flat_map(|&(_, m, order)| order.map(|c| (c, m))).collect();
    needed.sort_unstable();
    needed.dedup();
    let points: Vec<Point3> = needed
        .par_iter()
        .map(|&(c, m)| {
            let mt = mesh.triangles[m];
            preimage(
                &tri.points[c],
                [&map.images[mt[0]], &map.images[mt[1]], &map.images[mt[2]]],
                [&mesh.vertices[mt[0]], &mesh.vertices[mt[1]], &mesh.vertices[mt[2]]],
            )
        })
        .collect();

    let mut vertices: Vec<Point3> = Vec::new();
    let mut image_point = Vec::new();
    let mut index: HashMap<Point3, usize> = HashMap::new();
    let mut id_of: HashMap<(usize, usize), usize> = HashMap::with_capacity(needed.len());
    for (&(c, m), p) in needed.iter().zip(points) {
        let id = match index.get(&p) {
            Some(&id) => {
                if image_point[id] != c {
                    return Err(Error::Topology(format!("vertex {id} has two different images")));
                }
                id
            }
            None => {
                let id = vertices.len();
                vertices.push(p.clone());
                image_point.push(c);
                index.insert(p, id);
                id
            }
        };
        id_of.insert((c, m), id);
    }
    let mut triangles = Vec::with_capacity(pieces.len());
    let mut parent = Vec::with_capacity(pieces.len());
    let mut image_triangle = Vec::with_capacity(pieces.len());
    let mut over = vec![Vec::new(); tri.triangles.len()];
    for (t, m, order) in pieces {
        over[t].push(triangles.len());
        triangles.push(order.map(|c| id_of[&(c, m)]));
        parent.push(m);
        image_triangle.push(t);
    }

    let mut adjacency: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (t, v) in triangles.iter().enumerate() {
        for k in 0..3 {
            adjacency.entry(edge_key(v[k], v[(k + 1) % 3])).or_default().push(t);
        }
    }
    Ok(InducedTriangulation { vertices, image_point, triangles, parent, image_triangle, adjacency, over })
}

/// The point of the 3d triangle whose image under the affine map is `target`.
fn preimage(target: &Point2, images: [&Point2; 3], corners: [&Point3; 3]) -> Point3 {
    let w = barycentric2(target, images[0], images[1], images[2]).expect("non-degenerate parent image");
    exact::combine3(&w, corners)
}

/// Checks that each induced triangle sits inside its parent and maps onto its tagged
/// image triangle corner by corner, and that the pieces tile each parent by area.
pub fn check_refinement(ind: &InducedTriangulation, tri: &ImageTriangulation, mesh: &SurfaceMesh, map: &PlanarMap) -> Result<()> {
    let mut incidences: Vec<(usize, usize)> =
        ind.triangles.iter().zip(&ind.parent).flat_map(|(verts, &p)| verts.map(|v| (v, p))).collect();
    incidences.sort_unstable();
    incidences.dedup();
    incidences.par_iter().try_for_each(|&(v, parent)| {
        let mt = mesh.triangles[parent];
        let w = barycentric2(&tri.points[ind.image_point[v]], &map.images[mt[0]], &map.images[mt[1]], &map.images[mt[2]])
            .ok_or_else(|| Error::GeneralPosition(format!("mesh triangle {parent} has a degenerate image")))?;
        if w.iter().any(|x| x.is_negative()) {
            return Err(Error::Topology(format!("induced vertex {v} lies outside parent {parent}")));
        }
        if exact::combine3(&w, mt.map(|k| &mesh.vertices[k])) != ind.vertices[v] {
            return Err(Error::Topology(format!("induced vertex {v} is not the preimage of its image point")));
        }
        Ok(())
    })?;
    let mut area_by_parent: Vec<Q> = vec![Q::zero(); mesh.triangles.len()];
    for (t, verts) in ind.triangles.iter().enumerate() {
        let mut expected = tri.triangles[ind.image_triangle[t]];
        let mut got = verts.map(|v| ind.image_point[v]);
        expected.sort_unstable();
        got.sort_unstable();
        if expected != got {
            return Err(Error::Topology(format!("induced triangle {t} does not cover its image triangle")));
        }
        // The map is affine on the parent, so tiling can be checked on image areas.
        area_by_parent[ind.parent[t]] += tri.area2(ind.image_triangle[t]).abs();
    }
    for (m, area) in area_by_parent.iter().enumerate() {
        let mt = mesh.triangles[m];
        let full = exact::orient2d_value(&map.images[mt[0]], &map.images[mt[1]], &map.images[mt[2]]).abs();
        if *area != full {
            return Err(Error::Topology(format!("induced triangles do not tile parent {m}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::build_pslg;
    use crate::cdt::{constrained_delaunay, restrict_to_image};
    use crate::exact::q;
    use crate::fixtures;

    #[test]
    fn tetrahedron_pull_back() {
        let mesh = fixtures::tetrahedron();
        let map = fixtures::projection_xy(&mesh);
        let tri = restrict_to_image(constrained_delaunay(&build_pslg(&mesh, &map).unwrap()).unwrap(), &mesh, &map);
        assert_eq!(tri.triangles.len(), 3);
        assert!(tri.inside_triangles().all(|t| tri.multiplicity(t) == 2));
        let ind = pull_back(&tri, &mesh, &map).unwrap();
        assert_eq!(ind.triangles.len(), 6);
        // The apex (1,1,4) and its shadow (1,1,0) on the bottom face.
        assert_eq!(ind.vertices.len(), 5);
        assert!(ind.vertices.contains(&[q(1), q(1), q(0)]));
        check_refinement(&ind, &tri, &mesh, &map).unwrap();
        let surface = ind.as_surface_mesh().unwrap();
        assert!(surface.consistently_wound);
        assert_eq!(surface.euler_characteristic(), 2);
    }
}
