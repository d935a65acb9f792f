//! Resolution of the complex into a closed surface (one vertex per link cycle),
//! its components, and the projection to the first factor.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use super::{NeighborComplex, PairTriangle};
use crate::cdt::ImageTriangulation;
use crate::error::{Error, Result};
use crate::induced::InducedTriangulation;
use crate::mesh::{edge_key, EdgeKey};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResolvedVertex {
    /// Vertex of the unresolved complex this one maps to.
    pub base: usize,
    /// Which link cycle of the base vertex this vertex stands for.
    pub cycle: usize,
}

/// The complex with singular vertices split, so that every vertex link is one cycle.
/// Triangles keep the indices (and corner order) they have in the unresolved complex.
#[derive(Debug, Clone)]
pub struct ResolvedComplex {
    pub vertices: Vec<ResolvedVertex>,
    pub triangles: Vec<[usize; 3]>,
    pub factors: Vec<PairTriangle>,
    pub edges: BTreeMap<EdgeKey, Vec<usize>>,
    /// Triangle across the edge opposite each corner.
    pub neighbors: Vec<[usize; 3]>,
    pub component: Vec<usize>,
    pub num_components: usize,
    /// The swap (a, b) -> (b, a), on triangles and on vertices.
    pub swap_triangle: Vec<usize>,
    pub swap_vertex: Vec<usize>,
    pub diagonal: Vec<bool>,
    pub coords: Vec<([f64; 3], [f64; 3])>,
}

impl ResolvedComplex {
    /// The gluing map back to the unresolved complex.
    pub fn to_base(&self, v: usize) -> usize {
        self.vertices[v].base
    }

    pub fn component_triangles(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.triangles.len()).filter(move |&t| self.component[t] == c)
    }

    /// Number of vertices whose base vertex was split.
    pub fn split_vertices(&self) -> usize {
        self.vertices.iter().filter(|v| v.cycle > 0).count()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Affine pair parametrization of triangle t at barycentric weights w.
    pub fn pair_at(&self, t: usize, w: [f64; 3]) -> ([f64; 3], [f64; 3]) {
        let c = self.triangles[t];
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        for k in 0..3 {
            let (pa, pb) = self.coords[c[k]];
            for i in 0..3 {
                a[i] += w[k] * pa[i];
                b[i] += w[k] * pb[i];
            }
        }
        (a, b)
    }

    /// Number of link cycles at every vertex (always one after resolution).
    pub fn link_cycle_counts(&self) -> Vec<usize> {
        let mut corners: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for (k, &v) in tri.iter().enumerate() {
                corners[v].push((t, k));
            }
        }
        corners
            .iter()
            .enumerate()
            .map(|(v, list)| {
                let pos: BTreeMap<usize, usize> = list.iter().enumerate().map(|(i, &(t, _))| (t, i)).collect();
                let mut uf = UnionFind::<usize>::new(list.len());
                for &(t, k) in list {
                    for step in [1, 2] {
                        let w = self.triangles[t][(k + step) % 3];
                        for &u in &self.edges[&edge_key(v, w)] {
                            if let Some(&j) = pos.get(&u) {
                                uf.union(pos[&t], j);
                            }
                        }
                    }
                }
                (0..list.len()).filter(|&i| uf.find(i) == i).count()
            })
            .collect()
    }
}

/// Splits every vertex of the complex into one vertex per cycle of triangles around it.
pub fn resolve_singularities(cx: &NeighborComplex) -> Result<ResolvedComplex> {
    for (edge, tris) in &cx.edges {
        if tris.len() != 2 {
            return Err(Error::Topology(format!(
                "not a closed pseudo-surface: edge {edge:?} has {} triangles",
                tris.len()
            )));
        }
    }
    let nt = cx.triangles.len();
    let corner = |t: usize, k: usize| 3 * t + k;
    let mut uf = UnionFind::<usize>::new(3 * nt);
    for (&(u, v), tris) in &cx.edges {
        let (t1, t2) = (tris[0], tris[1]);
        for x in [u, v] {
            let k1 = cx.triangles[t1].corners.iter().position(|&c| c == x).unwrap();
            let k2 = cx.triangles[t2].corners.iter().position(|&c| c == x).unwrap();
            uf.union(corner(t1, k1), corner(t2, k2));
        }
    }

    let mut class_id: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vertices = Vec::new();
    let mut cycles_seen = vec![0usize; cx.vertices.len()];
    let mut triangles = vec![[0usize; 3]; nt];
    for t in 0..nt {
        for k in 0..3 {
            let root = uf.find(corner(t, k));
            let base = cx.triangles[t].corners[k];
            let id = *class_id.entry(root).or_insert_with(|| {
                vertices.push(ResolvedVertex { base, cycle: cycles_seen[base] });
                cycles_seen[base] += 1;
                vertices.len() - 1
            });
            triangles[t][k] = id;
        }
    }

    let mut edges: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (t, c) in triangles.iter().enumerate() {
        for k in 0..3 {
            edges.entry(edge_key(c[k], c[(k + 1) % 3])).or_default().push(t);
        }
    }
    let mut neighbors = vec![[NONE; 3]; nt];
    for (t, c) in triangles.iter().enumerate() {
        for k in 0..3 {
            let e = edge_key(c[(k + 1) % 3], c[(k + 2) % 3]);
            neighbors[t][k] = edges[&e].iter().copied().find(|&u| u != t).unwrap_or(NONE);
        }
    }

    let mut tri_uf = UnionFind::<usize>::new(nt);
    for tris in edges.values() {
        for w in tris.windows(2) {
            tri_uf.union(w[0], w[1]);
        }
    }
    let mut comp_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut component = vec![0usize; nt];
    for (t, slot) in component.iter_mut().enumerate() {
        let root = tri_uf.find(t);
        let next = comp_of_root.len();
        *slot = *comp_of_root.entry(root).or_insert(next);
    }

    let swap_triangle: Vec<usize> = cx
        .triangles
        .iter()
        .map(|t| cx.triangle_id(t.second, t.first).expect("complex is closed under swapping factors"))
        .collect();
    let mut swap_vertex = vec![NONE; vertices.len()];
    for t in 0..nt {
        let s = swap_triangle[t];
        for k in 0..3 {
            let (a, b) = cx.vertices[cx.triangles[t].corners[k]];
            let swapped = cx.vertex_id(b, a).expect("swapped vertex exists");
            let ks = cx.triangles[s].corners.iter().position(|&c| c == swapped).expect("swapped corner");
            let v = triangles[t][k];
            let image = triangles[s][ks];
            if swap_vertex[v] == NONE {
                swap_vertex[v] = image;
            } else if swap_vertex[v] != image {
                return Err(Error::Topology(format!("swap is not well defined on resolved vertex {v}")));
            }
        }
    }

    let diagonal = vertices.iter().map(|v| cx.diagonal[v.base]).collect();
    let coords = vertices.iter().map(|v| cx.coords[v.base]).collect();
    Ok(ResolvedComplex {
        vertices,
        triangles,
        factors: cx.triangles.clone(),
        edges,
        neighbors,
        component,
        num_components: comp_of_root.len(),
        swap_triangle,
        swap_vertex,
        diagonal,
        coords,
    })
}

/// Topology of one connected component of the resolved complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentInfo {
    pub id: usize,
    pub triangles: usize,
    pub edges: usize,
    pub vertices: usize,
    pub euler: i64,
    pub orientable: bool,
    /// Genus when orientable.
    pub genus: Option<i64>,
    /// Parity of the number of preimages of a generic point under the first-factor projection.
    pub degree_mod2: u8,
    /// Absolute signed degree of the projection, when orientable.
    pub signed_degree: Option<i64>,
    /// Induced triangle whose barycenter served as the generic point.
    pub reference_triangle: usize,
    pub meets_diagonal: bool,
    /// Component that the swap maps this one onto.
    pub swap_partner: usize,
}

/// Euler characteristic, orientability, genus and projection degree per component.
pub fn analyze_components(rc: &ResolvedComplex) -> Vec<ComponentInfo> {
    let nt = rc.triangles.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); rc.num_components];
    for t in 0..nt {
        members[rc.component[t]].push(t);
    }
    // Orientation by breadth-first propagation across shared edges.
    let mut sign = vec![0i8; nt];
    let mut orientable = vec![true; rc.num_components];
    let direction = |t: usize, u: usize, v: usize| -> i8 {
        let c = rc.triangles[t];
        if (0..3).any(|k| c[k] == u && c[(k + 1) % 3] == v) {
            1
        } else {
            -1
        }
    };
    for (c, list) in members.iter().enumerate() {
        let Some(&start) = list.first() else { continue };
        sign[start] = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(t) = queue.pop_front() {
            let tri = rc.triangles[t];
            for k in 0..3 {
                let n = rc.neighbors[t][k];
                if n == NONE {
                    continue;
                }
                let (u, v) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let want = -sign[t] * direction(t, u, v) * direction(n, u, v);
                if sign[n] == 0 {
                    sign[n] = want;
                    queue.push_back(n);
                } else if sign[n] != want {
                    orientable[c] = false;
                }
            }
        }
    }

    members
        .iter()
        .enumerate()
        .map(|(c, list)| {
            let verts: BTreeSet<usize> = list.iter().flat_map(|&t| rc.triangles[t]).collect();
            let edges: BTreeSet<EdgeKey> = list
                .iter()
                .flat_map(|&t| {
                    let x = rc.triangles[t];
                    (0..3).map(move |k| edge_key(x[k], x[(k + 1) % 3]))
                })
                .collect();
            let euler = verts.len() as i64 - edges.len() as i64 + list.len() as i64;
            let reference = rc.factors[list[0]].first;
            let over_reference: Vec<usize> = list.iter().copied().filter(|&t| rc.factors[t].first == reference).collect();
            let signed: i64 = over_reference.iter().map(|&t| sign[t] as i64).sum();
            ComponentInfo {
                id: c,
                triangles: list.len(),
                edges: edges.len(),
                vertices: verts.len(),
                euler,
                orientable: orientable[c],
                genus: orientable[c].then_some((2 - euler) / 2),
                degree_mod2: (over_reference.len() % 2) as u8,
                signed_degree: orientable[c].then_some(signed.abs()),
                reference_triangle: reference,
                meets_diagonal: verts.iter().any(|&v| rc.diagonal[v]),
                swap_partner: rc.component[rc.swap_triangle[list[0]]],
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaseComponent {
    pub component: usize,
    /// Adjacent induced triangles (A, B) with equal image and no third triangle over it.
    pub folding: Option<(usize, usize)>,
    pub via_fallback: bool,
}

/// Picks the component through a simple fold, or failing that an odd-degree
/// component that meets the diagonal.
pub fn find_base_component(
    rc: &ResolvedComplex,
    components: &[ComponentInfo],
    ind: &InducedTriangulation,
    tri: &ImageTriangulation,
) -> Result<BaseComponent> {
    let mut best: Option<(usize, (usize, usize))> = None;
    for (t, f) in rc.factors.iter().enumerate() {
        if tri.multiplicity(f.image) != 2 {
            continue;
        }
        if ind.edge_neighbors(f.first).contains(&f.second) {
            let c = rc.component[t];
            if best.is_none_or(|(bc, _)| c < bc) {
                best = Some((c, (f.first.min(f.second), f.first.max(f.second))));
            }
        }
    }
    if let Some((component, pair)) = best {
        return Ok(BaseComponent { component, folding: Some(pair), via_fallback: false });
    }
    components
        .iter()
        .find(|c| c.degree_mod2 == 1 && c.meets_diagonal)
        .map(|c| BaseComponent { component: c.id, folding: None, via_fallback: true })
        .ok_or(Error::NoBaseComponent)
}
