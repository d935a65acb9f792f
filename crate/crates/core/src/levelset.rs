//! The distance |a - b| lifted to the resolved complex, its level sets, and the
//! separation certificate for them.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::ResolvedComplex;
use crate::error::{Error, Result};

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

fn lerp(a: V3, b: V3, s: f64) -> V3 {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]), a[2] + s * (b[2] - a[2])]
}

/// d~ at every resolved vertex and its maximum per component.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceField {
    pub vertex_values: Vec<f64>,
    pub component_max: Vec<f64>,
    /// Vertex attaining each component maximum.
    pub component_argmax: Vec<usize>,
}

impl DistanceField {
    /// d~ at barycentric weights w of triangle t.
    pub fn eval(rc: &ResolvedComplex, t: usize, w: [f64; 3]) -> f64 {
        let (a, b) = rc.pair_at(t, w);
        norm(sub(a, b))
    }
}

/// Lifts |a - b| to the resolved complex. The square is convex on every triangle,
/// so per-component maxima are attained at vertices.
pub fn lift_distance(rc: &ResolvedComplex) -> DistanceField {
    let vertex_values: Vec<f64> = rc
        .coords
        .iter()
        .zip(&rc.diagonal)
        .map(|(&(a, b), &diag)| if diag { 0.0 } else { norm(sub(a, b)) })
        .collect();
    let mut component_max = vec![0.0; rc.num_components];
    let mut component_argmax = vec![usize::MAX; rc.num_components];
    for (t, tri) in rc.triangles.iter().enumerate() {
        let c = rc.component[t];
        for &v in tri {
            if component_argmax[c] == usize::MAX || vertex_values[v] > component_max[c] {
                component_max[c] = vertex_values[v];
                component_argmax[c] = v;
            }
        }
    }
    DistanceField { vertex_values, component_max, component_argmax }
}

#[derive(Debug, Clone)]
pub struct LevelSetParams {
    /// Absolute tolerance on d~ variation within a refined cell.
    pub epsilon_level: f64,
    pub relative_tolerance: f64,
    pub max_depth: u32,
}

impl LevelSetParams {
    pub fn new(epsilon_level: f64) -> Self {
        LevelSetParams { epsilon_level, relative_tolerance: 1e-3, max_depth: 8 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LoopPoint {
    pub triangle: usize,
    pub weights: [f64; 3],
    pub a: V3,
    pub b: V3,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelLoop {
    pub points: Vec<LoopPoint>,
    pub closed: bool,
    /// Length in the product space.
    pub length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSetResult {
    pub component: usize,
    pub delta: f64,
    pub depth: u32,
    pub loops: Vec<LevelLoop>,
    pub total_loop_count: usize,
    pub below_components: usize,
    pub above_components: usize,
    pub separated: bool,
    /// Refined vertices with d~ exactly delta, counted on the below side.
    pub perturbed_vertices: usize,
    /// Crossing points not met by exactly two segments.
    pub open_crossings: usize,
    pub max_deviation: f64,
    pub straddling_cells: usize,
    pub pruned_cells: usize,
}

impl LevelSetResult {
    pub fn total_length(&self) -> f64 {
        self.loops.iter().map(|l| l.length).sum()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum NodeKey {
    Vertex(usize),
    /// Point on the edge (u, v), u < v, with weight `s / resolution` on v.
    Edge(usize, usize, u32),
    Interior(usize, u32, u32),
}

#[derive(Clone, Copy)]
struct Cell {
    depth: u32,
    corners: [[u32; 3]; 3],
}

enum Class {
    Below,
    Above,
    Straddle,
}

fn midpoint(p: [u32; 3], q: [u32; 3]) -> [u32; 3] {
    [(p[0] + q[0]) / 2, (p[1] + q[1]) / 2, (p[2] + q[2]) / 2]
}

impl Cell {
    fn children(&self) -> [Cell; 4] {
        let [a, b, c] = self.corners;
        let (ab, bc, ca) = (midpoint(a, b), midpoint(b, c), midpoint(c, a));
        let depth = self.depth + 1;
        [
            Cell { depth, corners: [a, ab, ca] },
            Cell { depth, corners: [ab, b, bc] },
            Cell { depth, corners: [ca, bc, c] },
            Cell { depth, corners: [ab, bc, ca] },
        ]
    }
}

/// Distance from the origin to the triangle (p0, p1, p2).
fn origin_distance(p0: V3, p1: V3, p2: V3) -> f64 {
    let p = [0.0; 3];
    let ab = sub(p1, p0);
    let ac = sub(p2, p0);
    let ap = sub(p, p0);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return norm(p0);
    }
    let bp = sub(p, p1);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return norm(p1);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return norm(lerp(p0, p1, d1 / (d1 - d3)));
    }
    let cp = sub(p, p2);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return norm(p2);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return norm(lerp(p0, p2, d2 / (d2 - d6)));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return norm(lerp(p1, p2, (d4 - d3) / ((d4 - d3) + (d5 - d6))));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    norm([p0[0] + ab[0] * v + ac[0] * w, p0[1] + ab[1] * v + ac[1] * w, p0[2] + ab[2] * v + ac[2] * w])
}

struct Refiner<'a> {
    rc: &'a ResolvedComplex,
    delta: f64,
    tolerance: f64,
    margin: f64,
    resolution: u32,
    max_depth: u32,
}

impl Refiner<'_> {
    fn weights(&self, b: [u32; 3]) -> [f64; 3] {
        let r = self.resolution as f64;
        b.map(|x| x as f64 / r)
    }

    /// a - b at an integer barycentric point of triangle t.
    fn difference(&self, t: usize, b: [u32; 3]) -> V3 {
        let (a, bb) = self.rc.pair_at(t, self.weights(b));
        sub(a, bb)
    }

    fn classify(&self, t: usize, cell: &Cell) -> (Class, f64) {
        let w = cell.corners.map(|c| self.difference(t, c));
        let values = w.map(norm);
        let hi = values.iter().copied().fold(0.0, f64::max);
        let lo_vertex = values.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = hi - lo_vertex;
        if hi < self.delta - self.margin {
            return (Class::Below, spread);
        }
        if origin_distance(w[0], w[1], w[2]) > self.delta + self.margin {
            return (Class::Above, spread);
        }
        (Class::Straddle, spread)
    }

    /// Refines triangle t until its straddling cells are flat enough.
    fn refine(&self, t: usize, start: (Vec<Cell>, Vec<Cell>, u32)) -> (Vec<Cell>, Vec<Cell>, u32) {
        let (mut pruned, mut straddle, mut depth) = start;
        let mut spreads: Vec<f64> = straddle.iter().map(|c| self.classify(t, c).1).collect();
        while !straddle.is_empty() && depth < self.max_depth && spreads.iter().any(|&s| s > self.tolerance) {
            let mut next = Vec::with_capacity(straddle.len() * 4);
            let mut next_spreads = Vec::with_capacity(straddle.len() * 4);
            for cell in &straddle {
                for child in cell.children() {
                    match self.classify(t, &child) {
                        (Class::Straddle, s) => {
                            next.push(child);
                            next_spreads.push(s);
                        }
                        _ => pruned.push(child),
                    }
                }
            }
            straddle = next;
            spreads = next_spreads;
            depth += 1;
        }
        (pruned, straddle, depth)
    }

    fn root(&self, t: usize) -> (Vec<Cell>, Vec<Cell>, u32) {
        let r = self.resolution;
        let cell = Cell { depth: 0, corners: [[r, 0, 0], [0, r, 0], [0, 0, r]] };
        match self.classify(t, &cell).0 {
            Class::Straddle => (Vec::new(), vec![cell], 0),
            _ => (vec![cell], Vec::new(), 0),
        }
    }

    fn key(&self, t: usize, b: [u32; 3]) -> NodeKey {
        let c = self.rc.triangles[t];
        let nonzero: Vec<usize> = (0..3).filter(|&k| b[k] != 0).collect();
        match nonzero.as_slice() {
            [k] => NodeKey::Vertex(c[*k]),
            [i, j] => {
                let (u, v, wv) = if c[*i] < c[*j] { (c[*i], c[*j], b[*j]) } else { (c[*j], c[*i], b[*i]) };
                NodeKey::Edge(u, v, wv)
            }
            _ => NodeKey::Interior(t, b[1], b[2]),
        }
    }

    /// Canonical pair at a node, independent of the triangle it was reached from.
    fn node_pair(&self, key: NodeKey) -> (V3, V3) {
        match key {
            NodeKey::Vertex(v) => self.rc.coords[v],
            NodeKey::Edge(u, v, s) => {
                let s = s as f64 / self.resolution as f64;
                let (au, bu) = self.rc.coords[u];
                let (av, bv) = self.rc.coords[v];
                (lerp(au, av, s), lerp(bu, bv, s))
            }
            NodeKey::Interior(t, i, j) => {
                let r = self.resolution;
                self.rc.pair_at(t, self.weights([r - i - j, i, j]))
            }
        }
    }
}

#[derive(Clone, Copy)]
enum CrossKey {
    Nodes(usize, usize),
    /// Edge (u, v), root index, root parameter toward v, corner position of v.
    EdgeRoot(usize, usize, usize, f64, usize),
}

impl CrossKey {
    fn id(self) -> (u8, usize, usize, usize) {
        match self {
            CrossKey::Nodes(a, b) => (0, a, b, 0),
            CrossKey::EdgeRoot(u, v, r, _, _) => (1, u, v, r),
        }
    }
}

/// Both parameters s (ascending) with |w0 + s (w1 - w0)| = delta.
fn edge_roots(w0: V3, w1: V3, delta: f64) -> [f64; 2] {
    let d = sub(w1, w0);
    let a = dot(d, d);
    let b = dot(w0, d);
    let c = dot(w0, w0) - delta * delta;
    if a <= 0.0 {
        return [0.5, 0.5];
    }
    let disc = (b * b - a * c).max(0.0).sqrt();
    [(-b - disc) / a, (-b + disc) / a]
}

/// Parameter s in [0, 1] where |w0 + s (w1 - w0)| = delta, for endpoints on opposite sides.
fn crossing_parameter(w0: V3, w1: V3, delta: f64, first_below: bool) -> f64 {
    let d = sub(w1, w0);
    let a = dot(d, d);
    let b = dot(w0, d);
    let c = dot(w0, w0) - delta * delta;
    if a <= 0.0 {
        return 0.5;
    }
    let disc = (b * b - a * c).max(0.0).sqrt();
    let s = if first_below { (-b + disc) / a } else { (-b - disc) / a };
    s.clamp(0.0, 1.0)
}

/// Extracts the level set {d~ = delta} on one component as closed polylines, and
/// counts the components of its complement on each side.
pub fn extract_level_set(rc: &ResolvedComplex, component: usize, delta: f64, params: &LevelSetParams) -> Result<LevelSetResult> {
    let field = lift_distance(rc);
    let max = field.component_max.get(component).copied().unwrap_or(0.0);
    if !(delta > 0.0 && delta < max) {
        return Err(Error::DeltaOutOfRange { delta, max });
    }
    let max_depth = params.max_depth.min(20);
    let refiner = Refiner {
        rc,
        delta,
        tolerance: params.epsilon_level.max(params.relative_tolerance * delta),
        margin: 1e-9 * max,
        resolution: 1 << max_depth,
        max_depth,
    };
    let triangles: Vec<usize> = rc.component_triangles(component).collect();
    let leaves: Vec<(Vec<Cell>, Vec<Cell>, u32)> =
        triangles.par_iter().map(|&t| refiner.refine(t, refiner.root(t))).collect();
    let mut depth_of = vec![0u32; rc.triangles.len()];
    for (&t, r) in triangles.iter().zip(&leaves) {
        depth_of[t] = r.2;
    }
    let depth = depth_of.iter().copied().max().unwrap_or(0);

    let mut nodes: HashMap<NodeKey, usize> = HashMap::new();
    let mut pairs: Vec<(V3, V3)> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut node_of = |key: NodeKey, nodes: &mut HashMap<NodeKey, usize>| -> usize {
        *nodes.entry(key).or_insert_with(|| {
            let (a, b) = refiner.node_pair(key);
            let v = if let NodeKey::Vertex(x) = key { field.vertex_values[x] } else { norm(sub(a, b)) };
            pairs.push((a, b));
            values.push(v);
            pairs.len() - 1
        })
    };
    let mut pruned_corner_ids: Vec<(usize, Cell, usize)> = Vec::new();
    let mut straddle_ids: Vec<(usize, Cell, [usize; 3])> = Vec::new();
    for (&t, (pruned, straddle, _)) in triangles.iter().zip(&leaves) {
        for cell in pruned {
            let id = cell.corners.map(|c| node_of(refiner.key(t, c), &mut nodes));
            pruned_corner_ids.push((t, *cell, id[0]));
        }
        for cell in straddle {
            let id = cell.corners.map(|c| node_of(refiner.key(t, c), &mut nodes));
            straddle_ids.push((t, *cell, id));
        }
    }
    let n = values.len();
    let below: Vec<bool> = values.iter().map(|&v| v <= delta).collect();
    let perturbed_vertices = values.iter().filter(|&&v| v == delta).count();

    let mut uf = UnionFind::<usize>::new(n);
    for &(t, cell, anchor) in &pruned_corner_ids {
        // Every node on the closed boundary of a pruned cell is on its side, including
        // nodes of finer cells in neighboring triangles.
        let finest = rc.neighbors[t]
            .iter()
            .filter(|&&n| n != usize::MAX)
            .map(|&n| depth_of[n])
            .fold(depth_of[t], u32::max);
        let steps = 1u32 << (finest.max(cell.depth) - cell.depth);
        for k in 0..3 {
            let (p, q) = (cell.corners[k], cell.corners[(k + 1) % 3]);
            for i in 0..=steps {
                let point = [0, 1, 2].map(|j| {
                    let (pj, qj) = (p[j] as i64, q[j] as i64);
                    (pj + (qj - pj) * i as i64 / steps as i64) as u32
                });
                if let Some(&id) = nodes.get(&refiner.key(t, point)) {
                    uf.union(anchor, id);
                }
            }
        }
    }
    let mut crossings: HashMap<(u8, usize, usize, usize), usize> = HashMap::new();
    let mut crossing_points: Vec<LoopPoint> = Vec::new();
    let mut segments: Vec<(usize, usize)> = Vec::new();
    for &(t, cell, id) in &straddle_ids {
        for k in 0..3 {
            let (i, j) = (id[k], id[(k + 1) % 3]);
            if below[i] == below[j] {
                uf.union(i, j);
            }
        }
        let mut ends = Vec::with_capacity(2);
        for k in 0..3 {
            let (ki, kj) = (k, (k + 1) % 3);
            let (i, j) = (id[ki], id[kj]);
            if below[i] == below[j] {
                continue;
            }
            let (lo, hi, lo_corner, hi_corner) = if i < j { (i, j, ki, kj) } else { (j, i, kj, ki) };
            let (bl, bh) = (cell.corners[lo_corner], cell.corners[hi_corner]);
            // Sub-edges on an edge of the complex may differ between the two sides, so
            // crossings there are keyed by the root along the whole edge.
            let key = match (0..3).find(|&z| bl[z] == 0 && bh[z] == 0) {
                Some(z) => {
                    let c = rc.triangles[t];
                    let (p, q) = ((z + 1) % 3, (z + 2) % 3);
                    let (u, v, pos_v) = if c[p] < c[q] { (c[p], c[q], q) } else { (c[q], c[p], p) };
                    let r = refiner.resolution as f64;
                    let (sl, sh) = (bl[pos_v] as f64 / r, bh[pos_v] as f64 / r);
                    let (au, bu) = rc.coords[u];
                    let (av, bv) = rc.coords[v];
                    let roots = edge_roots(sub(au, bu), sub(av, bv), delta);
                    let (lo_s, hi_s) = (sl.min(sh), sl.max(sh));
                    let gap = |x: f64| (lo_s - x).max(x - hi_s).max(0.0);
                    let which = if gap(roots[0]) <= gap(roots[1]) { 0 } else { 1 };
                    CrossKey::EdgeRoot(u, v, which, roots[which], pos_v)
                }
                None => CrossKey::Nodes(lo, hi),
            };
            let next = crossing_points.len();
            let cid = *crossings.entry(key.id()).or_insert(next);
            if cid == next {
                let w0 = refiner.weights(bl);
                let w1 = refiner.weights(bh);
                let point = match key {
                    CrossKey::EdgeRoot(u, v, _, s, pos_v) => {
                        let (au, bu) = rc.coords[u];
                        let (av, bv) = rc.coords[v];
                        let mut weights = [0.0; 3];
                        weights[pos_v] = s;
                        let pos_u = rc.triangles[t].iter().position(|&x| x == u).unwrap();
                        weights[pos_u] = 1.0 - s;
                        LoopPoint { triangle: t, weights, a: lerp(au, av, s), b: lerp(bu, bv, s) }
                    }
                    CrossKey::Nodes(..) => {
                        let (a0, b0) = pairs[lo];
                        let (a1, b1) = pairs[hi];
                        let mut s = crossing_parameter(sub(a0, b0), sub(a1, b1), delta, below[lo]);
                        // Exact hits sit on the below side; shift the crossing off the vertex.
                        if values[lo] == delta {
                            s = s.max(1e-12);
                        }
                        if values[hi] == delta {
                            s = s.min(1.0 - 1e-12);
                        }
                        LoopPoint {
                            triangle: t,
                            weights: [0, 1, 2].map(|m| w0[m] + s * (w1[m] - w0[m])),
                            a: lerp(a0, a1, s),
                            b: lerp(b0, b1, s),
                        }
                    }
                };
                crossing_points.push(point);
            }
            ends.push(cid);
        }
        if ends.len() == 2 {
            segments.push((ends[0], ends[1]));
        }
    }

    let mut roots_below = Vec::new();
    let mut roots_above = Vec::new();
    for v in 0..n {
        let r = uf.find(v);
        if below[v] { roots_below.push(r) } else { roots_above.push(r) }
    }
    roots_below.sort_unstable();
    roots_below.dedup();
    roots_above.sort_unstable();
    roots_above.dedup();

    let m = crossing_points.len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &(x, y) in &segments {
        adjacency[x].push(y);
        adjacency[y].push(x);
    }
    let open_crossings = adjacency.iter().filter(|a| a.len() != 2).count();
    let mut visited = vec![false; m];
    let mut loops = Vec::new();
    for start in 0..m {
        if visited[start] || adjacency[start].is_empty() {
            continue;
        }
        let mut chain = vec![start];
        visited[start] = true;
        let mut prev = usize::MAX;
        let mut cur = start;
        let closed = loop {
            match adjacency[cur].iter().copied().find(|&x| x != prev && !visited[x]) {
                Some(x) => {
                    visited[x] = true;
                    chain.push(x);
                    prev = cur;
                    cur = x;
                }
                None => break adjacency[cur].len() == 2 && adjacency[cur].contains(&start) && chain.len() > 2,
            }
        };
        let points: Vec<LoopPoint> = chain.iter().map(|&c| crossing_points[c].clone()).collect();
        let mut length = 0.0;
        let count = points.len();
        let limit = if closed { count } else { count.saturating_sub(1) };
        for i in 0..limit {
            let (p, q) = (&points[i], &points[(i + 1) % count]);
            length += (dot(sub(p.a, q.a), sub(p.a, q.a)) + dot(sub(p.b, q.b), sub(p.b, q.b))).sqrt();
        }
        loops.push(LevelLoop { points, closed, length });
    }
    let max_deviation = crossing_points
        .iter()
        .map(|p| (norm(sub(p.a, p.b)) - delta).abs())
        .fold(0.0, f64::max);
    let below_components = roots_below.len();
    let above_components = roots_above.len();
    Ok(LevelSetResult {
        component,
        delta,
        depth,
        total_loop_count: loops.len(),
        loops,
        below_components,
        above_components,
        separated: below_components >= 1 && above_components >= 1 && below_components + above_components >= 2,
        perturbed_vertices,
        open_crossings,
        max_deviation,
        straddling_cells: straddle_ids.len(),
        pruned_cells: pruned_corner_ids.len(),
    })
}

/// Separation verdict for a level set: whether it splits the component into a
/// side below and a side above delta.
pub fn separation_check(rc: &ResolvedComplex, component: usize, delta: f64, params: &LevelSetParams) -> Result<LevelSetResult> {
    let mut result = extract_level_set(rc, component, delta, params)?;
    result.loops.clear();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::build_pslg;
    use crate::cdt::{constrained_delaunay, restrict_to_image};
    use crate::complex::{build_complex, resolve_singularities};
    use crate::fixtures;
    use crate::induced::pull_back;

    fn tetra() -> ResolvedComplex {
        let mesh = fixtures::tetrahedron();
        let map = fixtures::projection_xy(&mesh);
        let tri = restrict_to_image(constrained_delaunay(&build_pslg(&mesh, &map).unwrap()).unwrap(), &mesh, &map);
        let ind = pull_back(&tri, &mesh, &map).unwrap();
        resolve_singularities(&build_complex(&ind, &tri)).unwrap()
    }

    #[test]
    fn lifted_distance_values() {
        let rc = tetra();
        let field = lift_distance(&rc);
        assert_eq!(field.component_max[0], 4.0);
        for (v, &d) in field.vertex_values.iter().enumerate() {
            if rc.diagonal[v] {
                assert_eq!(d, 0.0);
            } else {
                assert_eq!(d, 4.0);
            }
        }
    }

    #[test]
    fn closest_point_distance() {
        let d = origin_distance([1.0, -1.0, 1.0], [1.0, 1.0, 1.0], [1.0, 0.0, -1.0]);
        assert!((d - 1.0).abs() < 1e-12);
        let d = origin_distance([2.0, 1.0, 0.0], [3.0, 1.0, 0.0], [2.0, 2.0, 0.0]);
        assert!((d - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tetrahedron_level_one() {
        let rc = tetra();
        let r = extract_level_set(&rc, 0, 1.0, &LevelSetParams::new(4e-4)).unwrap();
        assert_eq!(r.total_loop_count, 2);
        assert!(r.loops.iter().all(|l| l.closed));
        assert_eq!(r.open_crossings, 0);
        assert_eq!(r.below_components, 1);
        assert_eq!(r.above_components, 2);
        assert!(r.separated);
        assert!(r.max_deviation <= 4e-4);
    }

    #[test]
    fn small_delta_hugs_the_diagonal() {
        let rc = tetra();
        let r = extract_level_set(&rc, 0, 1e-3, &LevelSetParams::new(4e-4)).unwrap();
        assert_eq!(r.total_loop_count, 2);
        for p in r.loops.iter().flat_map(|l| &l.points) {
            assert!(norm(sub(p.a, p.b)) < 1e-2);
        }
    }

    #[test]
    fn delta_out_of_range() {
        let rc = tetra();
        assert!(matches!(
            extract_level_set(&rc, 0, 4.0, &LevelSetParams::new(1e-4)),
            Err(Error::DeltaOutOfRange { .. })
        ));
        assert!(extract_level_set(&rc, 0, 0.0, &LevelSetParams::new(1e-4)).is_err());
    }

    #[test]
    fn refinement_converges() {
        let rc = tetra();
        let coarse = LevelSetParams { epsilon_level: 1e-12, relative_tolerance: 0.0, max_depth: 4 };
        let fine = LevelSetParams { max_depth: 8, ..coarse.clone() };
        let a = extract_level_set(&rc, 0, 2.0, &coarse).unwrap().total_length();
        let b = extract_level_set(&rc, 0, 2.0, &fine).unwrap().total_length();
        assert!((a - b).abs() <= 0.01 * b, "{a} vs {b}");
    }
}
