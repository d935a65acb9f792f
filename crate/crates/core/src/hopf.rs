//! Inscribed-center estimation and the search for a pair of f-neighbors that are
//! antipodal through the center.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::ResolvedComplex;
use crate::error::{Error, Result};
use crate::exact::p3_to_f64;
use crate::mesh::{FacePlanes, SurfaceMesh};

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: V3, s: f64) -> V3 {
    a.map(|x| x * s)
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn lerp3(c: [V3; 3], w: [f64; 3]) -> V3 {
    let mut out = [0.0; 3];
    for k in 0..3 {
        for i in 0..3 {
            out[i] += w[k] * c[k][i];
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CenterParams {
    pub iterations: usize,
    pub samples_per_face: usize,
    pub seed: u64,
    /// Faces whose best sample gets a local refinement of the inner minimum.
    pub refine_faces: usize,
}

impl Default for CenterParams {
    fn default() -> Self {
        CenterParams { iterations: 200, samples_per_face: 20, seed: 0, refine_faces: 8 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CenterResult {
    pub center: V3,
    /// Estimated minimum over surface points x of |x - antipode(x)|.
    pub min_chord: f64,
    /// Surface point attaining the estimate.
    pub argmin: V3,
    pub iterations: usize,
}

struct Sampler<'a> {
    planes: &'a FacePlanes,
    faces: Vec<[V3; 3]>,
    /// (face, barycentric weights)
    points: Vec<(usize, [f64; 3])>,
}

impl Sampler<'_> {
    fn chord(&self, p: V3, x: V3) -> f64 {
        match self.planes.antipode(p, x) {
            Ok(y) => norm(sub(x, y)),
            Err(_) => f64::INFINITY,
        }
    }

    fn point(&self, f: usize, w: [f64; 3]) -> V3 {
        lerp3(self.faces[f], w)
    }

    /// Minimum chord over the sample, with the face and weights that attain it per face.
    fn per_face_min(&self, p: V3) -> Vec<(f64, [f64; 3])> {
        let mut best = vec![(f64::INFINITY, [1.0 / 3.0; 3]); self.faces.len()];
        for &(f, w) in &self.points {
            let d = self.chord(p, self.point(f, w));
            if d < best[f].0 {
                best[f] = (d, w);
            }
        }
        best
    }

    /// Sampled minimum with the `k` best faces refined locally.
    fn refined_min(&self, p: V3, k: usize) -> (f64, V3) {
        let mut ranked: Vec<(f64, usize, [f64; 3])> =
            self.per_face_min(p).into_iter().enumerate().map(|(f, (d, w))| (d, f, w)).collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut best = (ranked[0].0, self.point(ranked[0].1, ranked[0].2));
        for &(d, f, w) in ranked.iter().take(k) {
            let (value, w) = self.refine_on_face(p, f, w, d);
            if value < best.0 {
                best = (value, self.point(f, w));
            }
        }
        best
    }

    /// Pattern search on one face for the smallest chord, starting from `w`.
    fn refine_on_face(&self, p: V3, f: usize, mut w: [f64; 3], mut value: f64) -> (f64, [f64; 3]) {
        let mut step: f64 = 0.1;
        while step > 1e-7 {
            let mut improved = false;
            for (i, j) in [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)] {
                let mut c = w;
                let s = step.min(c[j]);
                if s <= 0.0 {
                    continue;
                }
                c[i] += s;
                c[j] -= s;
                let d = self.chord(p, self.point(f, c));
                if d < value {
                    value = d;
                    w = c;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        (value, w)
    }
}

/// Approximates the point p maximizing min over x of |x - antipode_p(x)| by a
/// Nelder-Mead search started at the vertex centroid.
pub fn estimate_center(mesh: &SurfaceMesh, extra_points: &[V3], params: &CenterParams) -> Result<CenterResult> {
    let planes = mesh.face_planes();
    let verts: Vec<V3> = mesh.vertices.iter().map(p3_to_f64).collect();
    let faces: Vec<[V3; 3]> = mesh.triangles.iter().map(|t| t.map(|v| verts[v])).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut points = Vec::new();
    for f in 0..faces.len() {
        points.push((f, [1.0 / 3.0; 3]));
        points.extend([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]].map(|w| (f, w)));
        points.extend([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].map(|w| (f, w)));
        for _ in 0..params.samples_per_face {
            let (mut s, mut t): (f64, f64) = (rng.gen(), rng.gen());
            if s + t > 1.0 {
                s = 1.0 - s;
                t = 1.0 - t;
            }
            points.push((f, [1.0 - s - t, s, t]));
        }
    }
    let sampler = Sampler { planes: &planes, faces, points };

    let centroid = mesh.centroid_f64();
    if !planes.contains_strictly(centroid) {
        return Err(Error::OriginNotInterior);
    }
    // Steps leaving the body are pulled back along the segment from the centroid.
    let project = |p: V3| -> V3 {
        if planes.contains_strictly(p) {
            return p;
        }
        let dir = sub(p, centroid);
        match planes.raycast(centroid, dir) {
            Ok(h) if h[1].t > 0.0 => add(centroid, scale(dir, 0.98 * h[1].t.min(1.0))),
            _ => centroid,
        }
    };
    let size = verts.iter().map(|v| norm(sub(*v, centroid))).fold(0.0, f64::max).max(1e-12);
    // The maximum is often a plateau; a faint pull picks the point nearest the centroid.
    let objective = |p: V3| -> f64 {
        let p = project(p);
        -sampler.refined_min(p, 3).0 + 1e-7 * size * dot(sub(p, centroid), sub(p, centroid)) / (size * size)
    };

    let (best, iterations) = nelder_mead(objective, centroid, 0.1 * size, params.iterations);
    let center = project(best);

    let (mut min_chord, mut argmin) = sampler.refined_min(center, params.refine_faces);
    for v in extra_points {
        let d = sampler.chord(center, *v);
        if d < min_chord {
            min_chord = d;
            argmin = *v;
        }
    }
    Ok(CenterResult { center, min_chord, argmin, iterations })
}

/// Minimizes `f` with the Nelder-Mead simplex method. Returns the best point and
/// the number of iterations used.
pub fn nelder_mead(f: impl Fn(V3) -> f64, start: V3, step: f64, iterations: usize) -> (V3, usize) {
    let mut simplex: Vec<(V3, f64)> = vec![(start, f(start))];
    for i in 0..3 {
        let mut p = start;
        p[i] += step;
        simplex.push((p, f(p)));
    }
    let mut used = 0;
    for _ in 0..iterations {
        used += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (simplex[3].1 - simplex[0].1).abs();
        let diameter = simplex.iter().map(|(p, _)| norm(sub(*p, simplex[0].0))).fold(0.0, f64::max);
        if spread < 1e-14 && diameter < 1e-10 * step.max(1e-300) {
            break;
        }
        let centroid = scale(add(add(simplex[0].0, simplex[1].0), simplex[2].0), 1.0 / 3.0);
        let worst = simplex[3];
        let along = |t: f64| add(centroid, scale(sub(worst.0, centroid), t));
        let r = along(-1.0);
        let fr = f(r);
        if fr < simplex[0].1 {
            let e = along(-2.0);
            let fe = f(e);
            simplex[3] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (r, fr);
        } else {
            let c = if fr < worst.1 { along(-0.5) } else { along(0.5) };
            let fc = f(c);
            if fc < worst.1.min(fr) {
                simplex[3] = (c, fc);
            } else {
                let best = simplex[0].0;
                for entry in simplex.iter_mut().skip(1) {
                    let p = add(best, scale(sub(entry.0, best), 0.5));
                    *entry = (p, f(p));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0, used)
}

#[derive(Debug, Clone)]
pub struct WitnessParams {
    pub tolerance: f64,
    /// Barycentric grid resolution per triangle for the initial scan.
    pub grid: usize,
    pub starts: usize,
    pub max_steps: usize,
}

impl Default for WitnessParams {
    fn default() -> Self {
        WitnessParams { tolerance: 1e-6, grid: 10, starts: 64, max_steps: 200 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathPoint {
    pub a: V3,
    pub b: V3,
    /// Resolved vertex, for every point but the witness itself.
    pub vertex: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HopfWitness {
    pub component: usize,
    pub triangle: usize,
    pub weights: [f64; 3],
    pub a: V3,
    pub b: V3,
    /// |u(a) + u(b)| for the unit directions u from the center.
    pub residual: f64,
    pub distance: f64,
    /// Sine of the angle between a - p and p - b.
    pub collinearity: f64,
    pub path: Vec<PathPoint>,
}

struct Residual<'a> {
    rc: &'a ResolvedComplex,
    center: V3,
}

impl Residual<'_> {
    fn unit(&self, x: V3) -> (V3, f64) {
        let d = sub(x, self.center);
        let n = norm(d);
        (scale(d, 1.0 / n.max(1e-300)), n)
    }

    fn value(&self, t: usize, w: [f64; 3]) -> (V3, f64) {
        let (a, b) = self.rc.pair_at(t, w);
        let g = add(self.unit(a).0, self.unit(b).0);
        (g, norm(g))
    }

    /// Residual vector and its derivative with respect to (w1, w2), where w0 = 1 - w1 - w2.
    fn jacobian(&self, t: usize, w: [f64; 3]) -> (V3, [V3; 2]) {
        let c = self.rc.triangles[t];
        let (a, b) = self.rc.pair_at(t, w);
        let (ua, na) = self.unit(a);
        let (ub, nb) = self.unit(b);
        let g = add(ua, ub);
        let project = |u: V3, n: f64, v: V3| scale(sub(v, scale(u, dot(u, v))), 1.0 / n.max(1e-300));
        let mut cols = [[0.0; 3]; 2];
        for (j, col) in cols.iter_mut().enumerate() {
            let (a0, b0) = self.rc.coords[c[0]];
            let (aj, bj) = self.rc.coords[c[j + 1]];
            *col = add(project(ua, na, sub(aj, a0)), project(ub, nb, sub(bj, b0)));
        }
        (g, cols)
    }
}

/// Moves from (t, w) by the barycentric step `dw`, stopping at the boundary or
/// crossing into the neighbor once already on it.
fn advance(rc: &ResolvedComplex, component: usize, t: usize, w: [f64; 3], dw: [f64; 3]) -> (usize, [f64; 3]) {
    let mut tau: f64 = 1.0;
    let mut exit = None;
    for k in 0..3 {
        if dw[k] < 0.0 {
            let s = w[k] / -dw[k];
            if s < tau {
                tau = s;
                exit = Some(k);
            }
        }
    }
    let mut nw = [0.0; 3];
    for k in 0..3 {
        nw[k] = (w[k] + tau * dw[k]).max(0.0);
    }
    let total: f64 = nw.iter().sum();
    nw = nw.map(|x| x / total);
    let Some(k) = exit else { return (t, nw) };
    if tau > 1e-12 {
        return (t, nw);
    }
    let n = rc.neighbors[t][k];
    if n == usize::MAX || rc.component[n] != component {
        return (t, nw);
    }
    let mut moved = [0.0; 3];
    for j in 0..3 {
        if j == k {
            continue;
        }
        let v = rc.triangles[t][j];
        if let Some(pos) = rc.triangles[n].iter().position(|&x| x == v) {
            moved[pos] = nw[j];
        }
    }
    // Nudge into the neighbor along the step direction.
    let total: f64 = moved.iter().sum();
    (n, moved.map(|x| x / total))
}

fn refine(res: &Residual, component: usize, mut t: usize, mut w: [f64; 3], params: &WitnessParams) -> (usize, [f64; 3], f64) {
    let mut r = res.value(t, w).1;
    let mut mu = 1e-3;
    for _ in 0..params.max_steps {
        if r <= params.tolerance * 1e-4 {
            break;
        }
        let (g, cols) = res.jacobian(t, w);
        let jtj = [
            [dot(cols[0], cols[0]), dot(cols[0], cols[1])],
            [dot(cols[1], cols[0]), dot(cols[1], cols[1])],
        ];
        let jtg = [dot(cols[0], g), dot(cols[1], g)];
        let mut accepted = false;
        for _ in 0..12 {
            let m = [[jtj[0][0] + mu, jtj[0][1]], [jtj[1][0], jtj[1][1] + mu]];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det.abs() < 1e-300 {
                mu *= 10.0;
                continue;
            }
            let d1 = -(m[1][1] * jtg[0] - m[0][1] * jtg[1]) / det;
            let d2 = -(-m[1][0] * jtg[0] + m[0][0] * jtg[1]) / det;
            let dw = [-d1 - d2, d1, d2];
            let (nt, nw) = advance(res.rc, component, t, w, dw);
            let nr = res.value(nt, nw).1;
            if nr < r || (nt != t && nr <= r) {
                t = nt;
                w = nw;
                r = nr;
                mu = (mu * 0.3).max(1e-12);
                accepted = true;
                break;
            }
            mu *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    (t, w, r)
}

/// Searches the component for (a, b) with a - p and b - p pointing in opposite
/// directions, by a grid scan of every triangle followed by damped Gauss-Newton
/// refinement that may walk across triangles.
pub fn find_equivariant_pair(rc: &ResolvedComplex, component: usize, center: V3, params: &WitnessParams) -> Result<HopfWitness> {
    let res = Residual { rc, center };
    let n = params.grid.max(1);
    let mut candidates: Vec<(f64, usize, [f64; 3])> = rc
        .component_triangles(component)
        .map(|t| {
            let mut best = (f64::INFINITY, t, [1.0 / 3.0; 3]);
            for i in 0..=n {
                for j in 0..=n - i {
                    let w = [(n - i - j) as f64 / n as f64, i as f64 / n as f64, j as f64 / n as f64];
                    let r = res.value(t, w).1;
                    if r < best.0 {
                        best = (r, t, w);
                    }
                }
            }
            best
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut best_residual = f64::INFINITY;
    for &(_, t0, w0) in candidates.iter().take(params.starts.max(1)) {
        let (t, w, r) = refine(&res, component, t0, w0, params);
        best_residual = best_residual.min(r);
        if r <= params.tolerance {
            let (a, b) = rc.pair_at(t, w);
            let da = sub(a, center);
            let db = sub(b, center);
            let collinearity = norm(cross(da, db)) / (norm(da) * norm(db)).max(1e-300);
            let path = path_to_diagonal(rc, component, t, w)?;
            return Ok(HopfWitness {
                component,
                triangle: t,
                weights: w,
                a,
                b,
                residual: r,
                distance: norm(sub(a, b)),
                collinearity,
                path,
            });
        }
    }
    Err(Error::EquivariantSearchFailed { best_residual })
}

/// A path from the witness to a diagonal vertex: one hop to the nearest corner of
/// its triangle, then a shortest edge path inside the component.
pub fn path_to_diagonal(rc: &ResolvedComplex, component: usize, t: usize, w: [f64; 3]) -> Result<Vec<PathPoint>> {
    let (a, b) = rc.pair_at(t, w);
    let mut path = vec![PathPoint { a, b, vertex: None }];
    let k = (0..3).max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i))).unwrap();
    let start = rc.triangles[t][k];
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); rc.vertices.len()];
    for (&(u, v), tris) in &rc.edges {
        if tris.iter().any(|&x| rc.component[x] == component) {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
    }
    let mut prev = vec![usize::MAX; rc.vertices.len()];
    let mut seen = vec![false; rc.vertices.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut target = None;
    while let Some(v) = queue.pop_front() {
        if rc.diagonal[v] {
            target = Some(v);
            break;
        }
        for &u in &adjacency[v] {
            if !seen[u] {
                seen[u] = true;
                prev[u] = v;
                queue.push_back(u);
            }
        }
    }
    let target = target.ok_or(Error::NoDiagonalVertex(component))?;
    let mut chain = vec![target];
    while *chain.last().unwrap() != start {
        chain.push(prev[*chain.last().unwrap()]);
    }
    chain.reverse();
    for v in chain {
        let (a, b) = rc.coords[v];
        path.push(PathPoint { a, b, vertex: Some(v) });
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let (p, _) = nelder_mead(|x| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2) + x[2] * x[2], [0.0; 3], 0.5, 500);
        assert!(norm(sub(p, [1.0, -2.0, 0.0])) < 1e-5);
    }

    #[test]
    fn octahedron_center_and_chord() {
        let mesh = fixtures::octahedron();
        let c = estimate_center(&mesh, &[], &CenterParams::default()).unwrap();
        assert!(norm(c.center) < 1e-3, "{:?}", c.center);
        let expected = 2.0 / 3f64.sqrt();
        assert!((c.min_chord - expected).abs() <= 1e-3 * expected, "{}", c.min_chord);
    }

    #[test]
    fn antipode_is_an_involution() {
        let mesh = fixtures::tetrahedron();
        let planes = mesh.face_planes();
        let p = mesh.centroid_f64();
        let verts: Vec<V3> = mesh.vertices.iter().map(p3_to_f64).collect();
        for t in &mesh.triangles {
            let x = lerp3(t.map(|v| verts[v]), [0.2, 0.3, 0.5]);
            let y = planes.antipode(p, x).unwrap();
            let z = planes.antipode(p, y).unwrap();
            assert!(norm(sub(x, z)) < 1e-9);
        }
    }
}
