//! Constrained Delaunay triangulation of the image graph and its restriction to
//! the image of the surface, with covering multiplicities.
//!
//! Construction: a lexicographic sweep triangulates the convex hull of the
//! points, constraints are forced in by flipping the edges they cross, and a
//! Lawson flip pass restores the constrained Delaunay property. Every predicate
//! is exact. Cocircular quadrilaterals keep the diagonal whose smaller endpoint
//! index is smaller, so the output is deterministic.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::Zero;
use rayon::prelude::*;

use crate::arrangement::{ImagePslg, PlanarMap};
use crate::error::{Error, Result};
use crate::exact::{self, incircle, lex_cmp2, orient2d, Point2, Q};
use crate::mesh::{edge_key, EdgeKey, SurfaceMesh};

const NONE: usize = usize::MAX;

/// Triangulation of the image points, conforming to every constraint.
#[derive(Debug, Clone)]
pub struct ImageTriangulation {
    pub points: Vec<Point2>,
    /// Counter-clockwise point-index triples.
    pub triangles: Vec<[usize; 3]>,
    pub constraint_edges: BTreeSet<EdgeKey>,
    /// Whether each triangle lies in the image of the surface. Empty until restricted.
    pub inside: Vec<bool>,
    /// Covering mesh triangles per triangle (empty for outside triangles).
    pub coverers: Vec<Vec<usize>>,
}

impl ImageTriangulation {
    pub fn multiplicity(&self, t: usize) -> usize {
        self.coverers.get(t).map_or(0, Vec::len)
    }

    pub fn is_restricted(&self) -> bool {
        self.inside.len() == self.triangles.len()
    }

    pub fn inside_triangles(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.triangles.len()).filter(|&t| self.inside.get(t).copied().unwrap_or(false))
    }

    /// Every undirected edge of the triangulation.
    pub fn edges(&self) -> BTreeSet<EdgeKey> {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| edge_key(t[k], t[(k + 1) % 3])))
            .collect()
    }

    /// Twice the (positive) area of triangle t.
    pub fn area2(&self, t: usize) -> Q {
        let [a, b, c] = self.triangles[t];
        exact::orient2d_value(&self.points[a], &self.points[b], &self.points[c])
    }

    pub fn barycenter(&self, t: usize) -> Point2 {
        let [a, b, c] = self.triangles[t];
        let third = exact::q_frac(1, 3);
        exact::combine2(&[third.clone(), third.clone(), third], [&self.points[a], &self.points[b], &self.points[c]])
    }

    /// Index of the triangle containing p in its interior, if any.
    pub fn locate_interior(&self, p: &Point2) -> Option<usize> {
        self.triangles.iter().position(|&[a, b, c]| {
            orient2d(&self.points[a], &self.points[b], p) > 0
                && orient2d(&self.points[b], &self.points[c], p) > 0
                && orient2d(&self.points[c], &self.points[a], p) > 0
        })
    }
}

struct Builder<'a> {
    pts: &'a [Point2],
    fp: Vec<[f64; 2]>,
    tris: Vec<[usize; 3]>,
    nbr: Vec<[usize; 3]>,
    vtri: Vec<usize>,
}

impl<'a> Builder<'a> {
    fn sweep(pts: &'a [Point2]) -> Result<Self> {
        let n = pts.len();
        if n < 3 {
            return Err(Error::Topology(format!("cannot triangulate {n} points")));
        }
        let fp: Vec<[f64; 2]> = pts.iter().map(exact::p2_to_f64).collect();
        let orient =
            |a: usize, b: usize, c: usize| exact::orient2d_f64(fp[a], fp[b], fp[c]).unwrap_or_else(|| orient2d(&pts[a], &pts[b], &pts[c]));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| lex_cmp2(&pts[i], &pts[j]));
        for w in order.windows(2) {
            if pts[w[0]] == pts[w[1]] {
                return Err(Error::Topology(format!("duplicate points {} and {}", w[0], w[1])));
            }
        }
        let k = (2..n)
            .find(|&k| orient(order[0], order[1], order[k]) != 0)
            .ok_or_else(|| Error::Topology("all points are collinear".into()))?;
        let apex = order[k];
        let chain = &order[..k];
        let ccw = orient(chain[0], chain[1], apex) > 0;

        let mut tris = Vec::new();
        let mut hull: Vec<usize>;
        for w in chain.windows(2) {
            tris.push(if ccw { [w[0], w[1], apex] } else { [w[1], w[0], apex] });
        }
        if ccw {
            hull = chain.to_vec();
            hull.push(apex);
        } else {
            hull = chain.iter().rev().copied().collect();
            hull.push(apex);
        }

        for &p in &order[k + 1..] {
            let h = hull.len();
            let visible: Vec<bool> =
                (0..h).map(|i| orient(hull[i], hull[(i + 1) % h], p) < 0).collect();
            let start = (0..h)
                .find(|&i| visible[i] && !visible[(i + h - 1) % h])
                .ok_or_else(|| Error::Topology("sweep found no visible hull edge".into()))?;
            let mut count = 0;
            while visible[(start + count) % h] {
                let i = (start + count) % h;
                tris.push([hull[(i + 1) % h], hull[i], p]);
                count += 1;
            }
            // Hull vertices strictly inside the visible chain are no longer on the hull.
            let mut next = Vec::with_capacity(h + 1);
            for s in 0..h {
                let i = (start + count + s) % h;
                next.push(hull[i]);
                if s + 1 == h - count + 1 {
                    break;
                }
            }
            // `next` runs from the end of the visible chain around to its start.
            next.push(p);
            hull = next;
        }

        let mut b = Builder { pts, fp, tris, nbr: Vec::new(), vtri: vec![NONE; n] };
        b.link_all();
        Ok(b)
    }

    fn orient(&self, a: usize, b: usize, c: usize) -> i32 {
        exact::orient2d_f64(self.fp[a], self.fp[b], self.fp[c])
            .unwrap_or_else(|| orient2d(&self.pts[a], &self.pts[b], &self.pts[c]))
    }

    fn incircle(&self, a: usize, b: usize, c: usize, d: usize) -> i32 {
        exact::incircle_f64(self.fp[a], self.fp[b], self.fp[c], self.fp[d])
            .unwrap_or_else(|| incircle(&self.pts[a], &self.pts[b], &self.pts[c], &self.pts[d]))
    }

    fn link_all(&mut self) {
        let mut directed: HashMap<(usize, usize), (usize, usize)> = HashMap::with_capacity(self.tris.len() * 3);
        for (t, tri) in self.tris.iter().enumerate() {
            for i in 0..3 {
                directed.insert((tri[(i + 1) % 3], tri[(i + 2) % 3]), (t, i));
            }
        }
        self.nbr = vec![[NONE; 3]; self.tris.len()];
        for (t, tri) in self.tris.iter().enumerate() {
            for i in 0..3 {
                if let Some(&(u, _)) = directed.get(&(tri[(i + 2) % 3], tri[(i + 1) % 3])) {
                    self.nbr[t][i] = u;
                }
                self.vtri[tri[i]] = t;
            }
        }
    }

    fn index_in(&self, t: usize, v: usize) -> usize {
        self.tris[t].iter().position(|&x| x == v).expect("vertex not in triangle")
    }

    /// Triangles around vertex v, in rotational order.
    fn star(&self, v: usize) -> Vec<usize> {
        let t0 = self.vtri[v];
        let mut out = vec![t0];
        let mut t = t0;
        loop {
            let k = self.index_in(t, v);
            let next = self.nbr[t][(k + 1) % 3];
            if next == NONE {
                break;
            }
            if next == t0 {
                return out;
            }
            out.push(next);
            t = next;
        }
        let mut t = t0;
        loop {
            let k = self.index_in(t, v);
            let next = self.nbr[t][(k + 2) % 3];
            if next == NONE || next == t0 {
                break;
            }
            out.push(next);
            t = next;
        }
        out
    }

    /// The triangle holding directed edge u -> v, with the index of its opposite vertex.
    fn find_directed(&self, u: usize, v: usize) -> Option<(usize, usize)> {
        self.star(u).into_iter().find_map(|t| {
            let k = self.index_in(t, u);
            (self.tris[t][(k + 1) % 3] == v).then_some((t, (k + 2) % 3))
        })
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.find_directed(u, v).is_some() || self.find_directed(v, u).is_some()
    }

    fn replace_nbr(&mut self, t: usize, old: usize, new: usize) {
        if t == NONE {
            return;
        }
        for x in self.nbr[t].iter_mut() {
            if *x == old {
                *x = new;
            }
        }
    }

    /// Flips the edge opposite vertex i of triangle t. Returns the new diagonal.
    fn flip(&mut self, t: usize, i: usize) -> (usize, usize) {
        let u = self.nbr[t][i];
        let [a, b, c] = [self.tris[t][i], self.tris[t][(i + 1) % 3], self.tris[t][(i + 2) % 3]];
        let j = (0..3).find(|&j| self.tris[u][(j + 1) % 3] == c && self.tris[u][(j + 2) % 3] == b).expect("shared edge");
        let d = self.tris[u][j];
        let n_ca = self.nbr[t][(i + 1) % 3];
        let n_ab = self.nbr[t][(i + 2) % 3];
        let n_bd = self.nbr[u][(j + 1) % 3];
        let n_dc = self.nbr[u][(j + 2) % 3];
        self.tris[t] = [a, b, d];
        self.nbr[t] = [n_bd, u, n_ab];
        self.tris[u] = [a, d, c];
        self.nbr[u] = [n_dc, n_ca, t];
        self.replace_nbr(n_bd, u, t);
        self.replace_nbr(n_ca, t, u);
        self.vtri[a] = t;
        self.vtri[b] = t;
        self.vtri[d] = u;
        self.vtri[c] = u;
        (a, d)
    }

    fn cross_strictly(&self, a: usize, b: usize, u: usize, v: usize) -> bool {
        self.orient(a, b, u) * self.orient(a, b, v) < 0
            && self.orient(u, v, a) * self.orient(u, v, b) < 0
    }

    /// Edges whose interiors the segment a-b crosses, in order from a.
    fn crossed_edges(&self, a: usize, b: usize) -> Result<Vec<(usize, usize)>> {
        let mut found = None;
        for t in self.star(a) {
            let k = self.index_in(t, a);
            let x = self.tris[t][(k + 1) % 3];
            let y = self.tris[t][(k + 2) % 3];
            if self.orient(a, x, b) > 0 && self.orient(a, y, b) < 0 {
                found = Some((t, k, x, y));
                break;
            }
        }
        let (t, k, x, y) =
            found.ok_or_else(|| Error::Topology(format!("constraint ({a}, {b}) passes through a point")))?;
        // y lies left of a->b, x lies right.
        let (mut left, mut right) = (y, x);
        let mut out = vec![(x, y)];
        let mut cur = self.nbr[t][k];
        loop {
            if cur == NONE {
                return Err(Error::Topology(format!("constraint ({a}, {b}) leaves the hull")));
            }
            let w = self.tris[cur].iter().copied().find(|&w| w != left && w != right).expect("third vertex");
            if w == b {
                return Ok(out);
            }
            let side = self.orient(a, b, w);
            let (exit_u, exit_v, behind) = match side {
                s if s > 0 => {
                    let o = left;
                    left = w;
                    (w, right, o)
                }
                s if s < 0 => {
                    let o = right;
                    right = w;
                    (left, w, o)
                }
                _ => return Err(Error::Topology(format!("constraint ({a}, {b}) passes through point {w}"))),
            };
            out.push((exit_u, exit_v));
            cur = self.nbr[cur][self.index_in(cur, behind)];
        }
    }

    fn insert_constraint(&mut self, a: usize, b: usize) -> Result<()> {
        if self.has_edge(a, b) {
            return Ok(());
        }
        let mut queue: VecDeque<(usize, usize)> = self.crossed_edges(a, b)?.into();
        let mut stall = 0usize;
        while let Some((u, v)) = queue.pop_front() {
            let (t, i) = self
                .find_directed(u, v)
                .ok_or_else(|| Error::Topology(format!("lost edge ({u}, {v}) during constraint insertion")))?;
            let n = self.nbr[t][i];
            if n == NONE {
                return Err(Error::Topology(format!("crossed edge ({u}, {v}) is on the hull")));
            }
            let pa = self.tris[t][i];
            let j = self.index_in(n, v);
            let qa = self.tris[n][(j + 2) % 3];
            let convex = self.orient(pa, qa, u) * self.orient(pa, qa, v) < 0;
            if !convex {
                queue.push_back((u, v));
                stall += 1;
                if stall > 4 * queue.len() + 16 {
                    return Err(Error::Topology(format!("constraint ({a}, {b}) insertion stalled")));
                }
                continue;
            }
            stall = 0;
            let (x, y) = self.flip(t, i);
            if self.cross_strictly(a, b, x, y) {
                queue.push_back((x, y));
            }
        }
        if !self.has_edge(a, b) {
            return Err(Error::Topology(format!("constraint ({a}, {b}) missing after insertion")));
        }
        Ok(())
    }

    /// Lawson flips until every unconstrained interior edge is locally Delaunay.
    fn legalize(&mut self, fixed: &BTreeSet<EdgeKey>) {
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for tri in &self.tris {
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                if u < v {
                    stack.push((u, v));
                }
            }
        }
        stack.reverse();
        while let Some((u, v)) = stack.pop() {
            if fixed.contains(&edge_key(u, v)) {
                continue;
            }
            let Some((t, i)) = self.find_directed(u, v) else { continue };
            let n = self.nbr[t][i];
            if n == NONE {
                continue;
            }
            let p = self.tris[t][i];
            let j = self.index_in(n, v);
            let q = self.tris[n][(j + 2) % 3];
            if self.should_flip(p, u, v, q) {
                self.flip(t, i);
                stack.extend([(p, u), (u, q), (q, v), (v, p)]);
            }
        }
    }

    /// Edge (u, v) with (p, u, v) counter-clockwise and q across it.
    fn should_flip(&self, p: usize, u: usize, v: usize, q: usize) -> bool {
        match self.incircle(p, u, v, q) {
            s if s > 0 => true,
            0 => p.min(q) < u.min(v),
            _ => false,
        }
    }
}

/// Constrained Delaunay triangulation of the convex hull of the PSLG points.
pub fn constrained_delaunay(pslg: &ImagePslg) -> Result<ImageTriangulation> {
    let constraints: Vec<(usize, usize)> = pslg.constraints.iter().map(|c| (c.a, c.b)).collect();
    triangulate_with_constraints(&pslg.points, &constraints)
}

/// Constrained Delaunay triangulation of arbitrary points and non-crossing segments.
pub fn triangulate_with_constraints(points: &[Point2], constraints: &[(usize, usize)]) -> Result<ImageTriangulation> {
    for &(a, b) in constraints {
        if a >= points.len() || b >= points.len() || a == b {
            return Err(Error::Topology(format!("invalid constraint ({a}, {b})")));
        }
    }
    let mut builder = Builder::sweep(points)?;
    let fixed: BTreeSet<EdgeKey> = constraints.iter().map(|&(a, b)| edge_key(a, b)).collect();
    for &(a, b) in &fixed {
        builder.insert_constraint(a, b)?;
    }
    builder.legalize(&fixed);
    for &(a, b) in &fixed {
        if !builder.has_edge(a, b) {
            return Err(Error::Topology(format!("constraint ({a}, {b}) lost while legalizing")));
        }
    }
    Ok(ImageTriangulation {
        points: points.to_vec(),
        triangles: builder.tris,
        constraint_edges: fixed,
        inside: Vec::new(),
        coverers: Vec::new(),
    })
}

/// Marks triangles covered by the image of some mesh triangle and records the coverers.
///
/// Because the triangulation conforms to every edge image, each triangle is either
/// entirely inside or entirely outside each mesh triangle's image, so testing the
/// barycenter decides coverage.
pub fn restrict_to_image(mut tri: ImageTriangulation, mesh: &SurfaceMesh, map: &PlanarMap) -> ImageTriangulation {
    let images: Vec<[Point2; 3]> = mesh
        .triangles
        .iter()
        .map(|t| [map.images[t[0]].clone(), map.images[t[1]].clone(), map.images[t[2]].clone()])
        .collect();
    let boxes: Vec<[f64; 4]> = images.iter().map(|img| bbox(img.iter())).collect();
    let images_f: Vec<[[f64; 2]; 3]> = images.iter().map(|img| [0, 1, 2].map(|k| exact::p2_to_f64(&img[k]))).collect();
    let coverers: Vec<Vec<usize>> = (0..tri.triangles.len())
        .into_par_iter()
        .map(|t| {
            let c = tri.barycenter(t);
            let cf = exact::p2_to_f64(&c);
            images
                .iter()
                .enumerate()
                .filter(|(m, img)| {
                    let b = boxes[*m];
                    let f = images_f[*m];
                    let orient = |i: usize, j: usize, p: Option<&Point2>| {
                        let (pe, pf) = match p {
                            Some(p) => (p, cf),
                            None => (&img[3 - i - j], f[3 - i - j]),
                        };
                        exact::orient2d_f64(f[i], f[j], pf).unwrap_or_else(|| orient2d(&img[i], &img[j], pe))
                    };
                    cf[0] >= b[0] - 1e-9 * (1.0 + b[0].abs())
                        && cf[0] <= b[2] + 1e-9 * (1.0 + b[2].abs())
                        && cf[1] >= b[1] - 1e-9 * (1.0 + b[1].abs())
                        && cf[1] <= b[3] + 1e-9 * (1.0 + b[3].abs())
                        && {
                            let o = orient(0, 1, None);
                            o != 0 && [(0, 1), (1, 2), (2, 0)].iter().all(|&(i, j)| orient(i, j, Some(&c)) * o >= 0)
                        }
                })
                .map(|(m, _)| m)
                .collect()
        })
        .collect();
    tri.inside = coverers.iter().map(|c| !c.is_empty()).collect();
    tri.coverers = coverers;
    tri
}

fn bbox<'a>(pts: impl Iterator<Item = &'a Point2>) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for p in pts {
        let f = exact::p2_to_f64(p);
        b[0] = b[0].min(f[0]);
        b[1] = b[1].min(f[1]);
        b[2] = b[2].max(f[0]);
        b[3] = b[3].max(f[1]);
    }
    b
}

/// Exact check that the triangles tile the convex hull without overlap: positive
/// orientation, every interior edge shared by two triangles with opposite direction,
/// and total area equal to the hull area.
pub fn check_tiling(tri: &ImageTriangulation) -> Result<()> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, v) in tri.triangles.iter().enumerate() {
        if orient2d(&tri.points[v[0]], &tri.points[v[1]], &tri.points[v[2]]) <= 0 {
            return Err(Error::Topology(format!("triangle {t} is not counter-clockwise")));
        }
        for k in 0..3 {
            if directed.insert((v[k], v[(k + 1) % 3]), t).is_some() {
                return Err(Error::Topology(format!("directed edge ({}, {}) repeated", v[k], v[(k + 1) % 3])));
            }
        }
    }
    let total: Q = (0..tri.triangles.len()).map(|t| tri.area2(t)).fold(Q::zero(), |a, b| a + b);
    let hull = convex_hull_area2(&tri.points);
    if total != hull {
        return Err(Error::Topology(format!("triangle area {total} differs from hull area {hull}")));
    }
    Ok(())
}

/// Twice the area of the convex hull (monotone chain).
pub fn convex_hull_area2(points: &[Point2]) -> Q {
    let mut pts: Vec<&Point2> = points.iter().collect();
    pts.sort_by(|a, b| lex_cmp2(a, b));
    pts.dedup();
    if pts.len() < 3 {
        return Q::zero();
    }
    let mut lower: Vec<&Point2> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && orient2d(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<&Point2> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && orient2d(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    let hull: Vec<&Point2> = lower.into_iter().chain(upper).collect();
    let mut area = Q::zero();
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        area += &a[0] * &b[1] - &a[1] * &b[0];
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    fn pts(list: &[(i64, i64)]) -> Vec<Point2> {
        list.iter().map(|&(x, y)| [q(x), q(y)]).collect()
    }

    fn sorted(tri: &ImageTriangulation) -> Vec<[usize; 3]> {
        let mut v: Vec<[usize; 3]> = tri
            .triangles
            .iter()
            .map(|t| {
                let mut s = *t;
                s.sort();
                s
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn single_triangle() {
        let p = pts(&[(0, 0), (3, 0), (0, 3)]);
        let t = triangulate_with_constraints(&p, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(sorted(&t), vec![[0, 1, 2]]);
    }

    #[test]
    fn forced_star_around_interior_point() {
        let p = pts(&[(0, 0), (4, 0), (0, 4), (1, 1)]);
        let c = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let t = triangulate_with_constraints(&p, &c).unwrap();
        assert_eq!(sorted(&t), vec![[0, 1, 3], [0, 2, 3], [1, 2, 3]]);
        check_tiling(&t).unwrap();
    }

    #[test]
    fn cocircular_square_uses_tie_break() {
        let p = pts(&[(0, 0), (1, 0), (1, 1), (0, 1)]);
        let t = triangulate_with_constraints(&p, &[]).unwrap();
        // Diagonal (0, 2) has the smaller minimum endpoint index.
        assert!(t.edges().contains(&(0, 2)));
        assert_eq!(t.triangles.len(), 2);
        // Relabel so the other diagonal has the smaller index.
        let p = pts(&[(1, 0), (0, 0), (0, 1), (1, 1)]);
        let t = triangulate_with_constraints(&p, &[]).unwrap();
        assert!(t.edges().contains(&(0, 2)));
    }

    #[test]
    fn collinear_prefix_and_hull_points() {
        let p = pts(&[(0, 0), (1, 0), (2, 0), (3, 0), (1, 2), (5, 1), (2, -3)]);
        let t = triangulate_with_constraints(&p, &[]).unwrap();
        check_tiling(&t).unwrap();
    }

    #[test]
    fn constraint_forced_against_delaunay() {
        // A long thin constraint that the unconstrained Delaunay triangulation would not contain.
        let p = pts(&[(0, 0), (10, 0), (5, 1), (5, -1), (2, 3), (8, -3)]);
        let t = triangulate_with_constraints(&p, &[(0, 1)]).unwrap();
        assert!(t.edges().contains(&(0, 1)));
        check_tiling(&t).unwrap();
    }

    #[test]
    fn rejects_duplicates() {
        let p = pts(&[(0, 0), (1, 0), (0, 0)]);
        assert!(triangulate_with_constraints(&p, &[]).is_err());
    }
}
