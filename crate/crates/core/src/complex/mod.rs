//! The complex of f-neighbors: ordered pairs of distinct induced triangles with
//! identical images, glued along matched faces inside P x P.

mod resolve;

pub use resolve::{
    analyze_components, find_base_component, resolve_singularities, BaseComponent, ComponentInfo, ResolvedComplex,
    ResolvedVertex,
};

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::cdt::ImageTriangulation;
use crate::induced::InducedTriangulation;
use crate::mesh::{edge_key, EdgeKey};

/// Triangle [A, B] of the complex. Corner k pairs the k-th vertex of A with the
/// vertex of B that has the same image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairTriangle {
    pub first: usize,
    pub second: usize,
    pub image: usize,
    pub corners: [usize; 3],
}

#[derive(Debug, Clone)]
pub struct NeighborComplex {
    /// Pairs (a, b) of induced vertices with equal image.
    pub vertices: Vec<(usize, usize)>,
    pub diagonal: Vec<bool>,
    pub triangles: Vec<PairTriangle>,
    pub edges: BTreeMap<EdgeKey, Vec<usize>>,
    /// Floating-point coordinates of both members of every vertex pair.
    pub coords: Vec<([f64; 3], [f64; 3])>,
    pair_index: HashMap<(usize, usize), usize>,
    by_factors: HashMap<(usize, usize), usize>,
}

impl NeighborComplex {
    pub fn vertex_id(&self, a: usize, b: usize) -> Option<usize> {
        self.pair_index.get(&(a, b)).copied()
    }

    /// Index of the triangle [first, second], if present.
    pub fn triangle_id(&self, first: usize, second: usize) -> Option<usize> {
        self.by_factors.get(&(first, second)).copied()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Rebuilds derived tables from a triangle list (used to construct negative controls).
    pub fn from_triangles(ind: &InducedTriangulation, triangles: Vec<PairTriangle>, vertices: Vec<(usize, usize)>) -> Self {
        let mut used = vec![false; vertices.len()];
        for t in &triangles {
            for &c in &t.corners {
                used[c] = true;
            }
        }
        let mut remap = vec![usize::MAX; vertices.len()];
        let mut kept = Vec::new();
        for (v, pair) in vertices.into_iter().enumerate() {
            if used[v] {
                remap[v] = kept.len();
                kept.push(pair);
            }
        }
        let triangles = triangles
            .into_iter()
            .map(|mut t| {
                t.corners = t.corners.map(|c| remap[c]);
                t
            })
            .collect();
        Self::assemble(ind, kept, triangles)
    }

    fn assemble(ind: &InducedTriangulation, vertices: Vec<(usize, usize)>, triangles: Vec<PairTriangle>) -> Self {
        let mut edges: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            let c = tri.corners;
            for k in 0..3 {
                edges.entry(edge_key(c[k], c[(k + 1) % 3])).or_default().push(t);
            }
        }
        let diagonal = vertices.iter().map(|&(a, b)| a == b).collect();
        let coords = vertices.iter().map(|&(a, b)| (ind.vertex_f64(a), ind.vertex_f64(b))).collect();
        let pair_index = vertices.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let by_factors = triangles.iter().enumerate().map(|(i, t)| ((t.first, t.second), i)).collect();
        NeighborComplex { vertices, diagonal, triangles, edges, coords, pair_index, by_factors }
    }
}

/// Emits [A, B] for every ordered pair of distinct induced triangles over the same
/// image triangle, with corners matched through the shared image vertices.
pub fn build_complex(ind: &InducedTriangulation, tri: &ImageTriangulation) -> NeighborComplex {
    let mut vertices = Vec::new();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut triangles = Vec::new();
    for (t, over) in ind.over.iter().enumerate() {
        if over.len() < 2 || !tri.inside.get(t).copied().unwrap_or(false) {
            continue;
        }
        for &a in over {
            for &b in over {
                if a == b {
                    continue;
                }
                let ta = ind.triangles[a];
                let tb = ind.triangles[b];
                let corners = ta.map(|va| {
                    let vb = *tb
                        .iter()
                        .find(|&&vb| ind.image_point[vb] == ind.image_point[va])
                        .expect("triangles over one image triangle share corner images");
                    *index.entry((va, vb)).or_insert_with(|| {
                        vertices.push((va, vb));
                        vertices.len() - 1
                    })
                });
                triangles.push(PairTriangle { first: a, second: b, image: t, corners });
            }
        }
    }
    NeighborComplex::assemble(ind, vertices, triangles)
}

/// How an edge of the complex is shared by exactly two triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeCase {
    /// Both factors use the same induced edge; the partner is the swapped triangle.
    Diagonal,
    /// Partner [A1, B1] replaces both factors.
    NoFolding,
    /// Partner replaces exactly one factor.
    OneFolding,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeViolation {
    pub edge: EdgeKey,
    pub triangles: Vec<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EdgeManifoldReport {
    pub edges: usize,
    pub diagonal: usize,
    pub no_folding: usize,
    pub one_folding: usize,
    pub violations: Vec<EdgeViolation>,
    #[serde(skip)]
    pub cases: BTreeMap<EdgeKey, EdgeCase>,
}

impl EdgeManifoldReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.diagonal + self.no_folding + self.one_folding == self.edges
    }
}

/// Verifies that every edge of the complex lies in exactly two triangles and labels
/// how the two triangles meet.
pub fn verify_edge_manifold(cx: &NeighborComplex, ind: &InducedTriangulation) -> EdgeManifoldReport {
    let mut report = EdgeManifoldReport { edges: cx.edges.len(), ..Default::default() };
    for (&edge, tris) in &cx.edges {
        let fail = |msg: String| EdgeViolation { edge, triangles: tris.clone(), message: msg };
        if tris.len() != 2 {
            report.violations.push(fail(format!("edge belongs to {} triangles", tris.len())));
            continue;
        }
        let (p, q) = (cx.vertices[edge.0], cx.vertices[edge.1]);
        let l_first = edge_key(p.0, q.0);
        let l_second = edge_key(p.1, q.1);
        let t1 = cx.triangles[tris[0]];
        let t2 = cx.triangles[tris[1]];
        let case = if l_first == l_second {
            if t2.first == t1.second && t2.second == t1.first {
                Some(EdgeCase::Diagonal)
            } else {
                None
            }
        } else {
            let shares = |x: usize, l: EdgeKey| {
                let v = ind.triangles[x];
                (0..3).any(|k| edge_key(v[k], v[(k + 1) % 3]) == l)
            };
            if !(shares(t2.first, l_first) && shares(t2.second, l_second)) {
                None
            } else {
                match (t2.first == t1.first, t2.second == t1.second) {
                    (false, false) => Some(EdgeCase::NoFolding),
                    (true, false) | (false, true) => Some(EdgeCase::OneFolding),
                    (true, true) => None,
                }
            }
        };
        match case {
            Some(c) => {
                match c {
                    EdgeCase::Diagonal => report.diagonal += 1,
                    EdgeCase::NoFolding => report.no_folding += 1,
                    EdgeCase::OneFolding => report.one_folding += 1,
                }
                report.cases.insert(edge, c);
            }
            None => report.violations.push(fail("edge could not be classified".into())),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::build_pslg;
    use crate::cdt::{constrained_delaunay, restrict_to_image};
    use crate::fixtures;
    use crate::induced::pull_back;

    fn tetra() -> (InducedTriangulation, ImageTriangulation) {
        let mesh = fixtures::tetrahedron();
        let map = fixtures::projection_xy(&mesh);
        let tri = restrict_to_image(constrained_delaunay(&build_pslg(&mesh, &map).unwrap()).unwrap(), &mesh, &map);
        (pull_back(&tri, &mesh, &map).unwrap(), tri)
    }

    #[test]
    fn tetrahedron_complex_counts() {
        let (ind, tri) = tetra();
        let cx = build_complex(&ind, &tri);
        assert_eq!(cx.vertices.len(), 5);
        assert_eq!(cx.edges.len(), 9);
        assert_eq!(cx.triangles.len(), 6);
        assert_eq!(cx.euler_characteristic(), 2);
        assert_eq!(cx.diagonal.iter().filter(|&&d| d).count(), 3);
        let report = verify_edge_manifold(&cx, &ind);
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.diagonal, 3);
        assert_eq!(report.no_folding + report.one_folding, 6);
    }

    #[test]
    fn tetrahedron_resolution() {
        let (ind, tri) = tetra();
        let cx = build_complex(&ind, &tri);
        let rc = resolve_singularities(&cx).unwrap();
        assert_eq!(rc.num_components, 1);
        assert_eq!(rc.euler_characteristic(), 2);
        assert!(rc.link_cycle_counts().iter().all(|&c| c == 1));
        let info = analyze_components(&rc);
        assert_eq!(info[0].degree_mod2, 1);
        assert!(info[0].orientable);
        assert_eq!(info[0].genus, Some(0));
        assert!(info[0].meets_diagonal);
        let base = find_base_component(&rc, &info, &ind, &tri).unwrap();
        assert_eq!(base.component, 0);
        assert!(!base.via_fallback);
        for t in 0..rc.triangles.len() {
            assert_eq!(rc.swap_triangle[rc.swap_triangle[t]], t);
        }
    }

    #[test]
    fn dropping_a_triangle_is_detected() {
        let (ind, tri) = tetra();
        let cx = build_complex(&ind, &tri);
        let mut tris = cx.triangles.clone();
        tris.pop();
        let broken = NeighborComplex::from_triangles(&ind, tris, cx.vertices.clone());
        let report = verify_edge_manifold(&broken, &ind);
        assert!(!report.passed());
        assert!(resolve_singularities(&broken).is_err());
    }
}
