use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arrangement::PlanarMap;
use crate::complex::NeighborComplex;
use crate::exact::{self, barycentric2, combine3, cross3, dot3, orient2d, p2_to_f64, sub3, sum_of_products, Point2, Point3, Q};
use crate::induced::InducedTriangulation;
use crate::mesh::SurfaceMesh;

const DENOMINATOR: i64 = 1 << 20;
const MAX_COUNTEREXAMPLES: usize = 10;

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub samples: usize,
    /// Image points discarded for landing on an edge image.
    pub skipped: usize,
    pub preimage_pairs: usize,
    pub reverse_samples: usize,
    pub counterexamples: Vec<String>,
    pub passed: bool,
}

fn random_weights(rng: &mut ChaCha8Rng) -> [Q; 3] {
    let i = rng.gen_range(1..DENOMINATOR - 1);
    let j = rng.gen_range(1..DENOMINATOR - i);
    let k = DENOMINATOR - i - j;
    [i, j, k].map(|x| exact::q_frac(x, DENOMINATOR))
}

/// Exact affine map of one mesh triangle onto its image: x -> offset + rows x.
struct Affine {
    offset: Point2,
    rows: [Point3; 2],
}

impl Affine {
    fn new(corners: [&Point3; 3], images: [&Point2; 3]) -> Option<Affine> {
        let e1 = sub3(corners[1], corners[0]);
        let e2 = sub3(corners[2], corners[0]);
        let n = cross3(&e1, &e2);
        let det = dot3(&e1, &cross3(&e2, &n));
        if det.is_zero() {
            return None;
        }
        // Dual basis of (e1, e2, n), so that the normal direction maps to zero.
        let g1 = cross3(&e2, &n).map(|x| x / &det);
        let g2 = cross3(&n, &e1).map(|x| x / &det);
        let rows = [0, 1].map(|r| {
            let d1 = &images[1][r] - &images[0][r];
            let d2 = &images[2][r] - &images[0][r];
            [0, 1, 2].map(|k| &d1 * &g1[k] + &d2 * &g2[k])
        });
        let offset = [0, 1].map(|r| &images[0][r] - dot3(&rows[r], corners[0]));
        Some(Affine { offset, rows })
    }

    fn apply(&self, x: &Point3) -> Point2 {
        let one = Q::one();
        [0, 1].map(|r| sum_of_products(self.rows[r].iter().zip(x).chain([(&self.offset[r], &one)])))
    }
}

fn orient(a: (&Point2, [f64; 2]), b: (&Point2, [f64; 2]), c: (&Point2, [f64; 2])) -> i32 {
    exact::orient2d_f64(a.1, b.1, c.1).unwrap_or_else(|| orient2d(a.0, b.0, c.0))
}

struct Oracle<'a> {
    mesh: &'a SurfaceMesh,
    map: &'a PlanarMap,
    ind: &'a InducedTriangulation,
    cx: &'a NeighborComplex,
    images_f: Vec<[f64; 2]>,
    image_boxes: Vec<[f64; 4]>,
    affine: Vec<Affine>,
    induced_by_parent: Vec<Vec<usize>>,
    /// Image of every induced vertex, computed through the affine map of a parent.
    vertex_image: Vec<Point2>,
    vertex_image_f: Vec<[f64; 2]>,
}

enum Sample {
    Skipped,
    Checked { pairs: usize, failures: Vec<String> },
}

fn bbox(p: &[[f64; 2]]) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for q in p {
        b = [b[0].min(q[0]), b[1].max(q[0]), b[2].min(q[1]), b[3].max(q[1])];
    }
    b
}

fn in_box(b: &[f64; 4], q: [f64; 2]) -> bool {
    let slack = 1e-9 * (b[1] - b[0] + b[3] - b[2]).max(1.0);
    q[0] >= b[0] - slack && q[0] <= b[1] + slack && q[1] >= b[2] - slack && q[1] <= b[3] + slack
}

impl Oracle<'_> {
    fn new<'a>(mesh: &'a SurfaceMesh, map: &'a PlanarMap, ind: &'a InducedTriangulation, cx: &'a NeighborComplex) -> Oracle<'a> {
        let images_f: Vec<[f64; 2]> = map.images.iter().map(p2_to_f64).collect();
        let image_boxes = mesh.triangles.iter().map(|t| bbox(&t.map(|v| images_f[v]))).collect();
        let affine: Vec<Affine> = mesh
            .triangles
            .iter()
            .map(|t| {
                Affine::new(t.map(|v| &mesh.vertices[v]), t.map(|v| &map.images[v])).expect("non-degenerate mesh triangle")
            })
            .collect();
        let mut induced_by_parent = vec![Vec::new(); mesh.triangles.len()];
        let mut some_parent = vec![usize::MAX; ind.vertices.len()];
        for (t, &p) in ind.parent.iter().enumerate() {
            induced_by_parent[p].push(t);
            for v in ind.triangles[t] {
                some_parent[v] = p;
            }
        }
        let vertex_image: Vec<Point2> =
            ind.vertices.par_iter().zip(&some_parent).map(|(x, &p)| affine[p].apply(x)).collect();
        let vertex_image_f = vertex_image.iter().map(p2_to_f64).collect();
        Oracle { mesh, map, ind, cx, images_f, image_boxes, affine, induced_by_parent, vertex_image, vertex_image_f }
    }

    /// Preimages of q, one per mesh triangle whose image contains it; None if q is on an edge image.
    fn preimages(&self, q: &Point2) -> Option<Vec<(usize, Point3)>> {
        let qf = p2_to_f64(q);
        let mut out = Vec::new();
        for (m, b) in self.image_boxes.iter().enumerate() {
            if !in_box(b, qf) {
                continue;
            }
            let t = self.mesh.triangles[m];
            let [p0, p1, p2] = t.map(|v| (&self.map.images[v], self.images_f[v]));
            let o = orient(p0, p1, p2);
            let qq = (q, qf);
            let s = [orient(p0, p1, qq), orient(p1, p2, qq), orient(p2, p0, qq)];
            if s.iter().any(|&x| x == -o) {
                continue;
            }
            if s.contains(&0) {
                return None;
            }
            let w = barycentric2(q, p0.0, p1.0, p2.0)?;
            out.push((m, combine3(&w, t.map(|v| &self.mesh.vertices[v]))));
        }
        Some(out)
    }

    /// Induced triangles of `parent` whose image contains q, with q's barycentric weights.
    fn containing(&self, parent: usize, q: &Point2) -> Vec<(usize, [Q; 3])> {
        let qf = p2_to_f64(q);
        self.induced_by_parent[parent]
            .iter()
            .filter_map(|&t| {
                let v = self.ind.triangles[t];
                if !in_box(&bbox(&v.map(|k| self.vertex_image_f[k])), qf) {
                    return None;
                }
                let c = v.map(|k| (&self.vertex_image[k], self.vertex_image_f[k]));
                let o = orient(c[0], c[1], c[2]);
                let qq = (q, qf);
                if [(0, 1), (1, 2), (2, 0)].iter().any(|&(i, j)| orient(c[i], c[j], qq) == -o) {
                    return None;
                }
                let w = barycentric2(q, c[0].0, c[1].0, c[2].0)?;
                Some((t, w))
            })
            .collect()
    }

    /// Induced triangles over q that contain the preimage x, with weights of q.
    fn located(&self, q: &Point2, (m, x): &(usize, Point3)) -> Vec<(usize, [Q; 3])> {
        self.containing(*m, q)
            .into_iter()
            .filter(|(t, w)| combine3(w, self.ind.triangles[*t].map(|k| &self.ind.vertices[k])) == *x)
            .collect()
    }

    /// Whether some triangle [A, B] of the complex holds the pair at matching parameters.
    fn covered(&self, first: &[(usize, [Q; 3])], second: &[(usize, [Q; 3])]) -> bool {
        first.iter().any(|(ta, w)| {
            second.iter().any(|(tb, wb)| {
                let Some(id) = self.cx.triangle_id(*ta, *tb) else { return false };
                let (ca, cb) = (self.ind.triangles[*ta], self.ind.triangles[*tb]);
                self.cx.triangles[id].corners.iter().all(|&c| {
                    let (u, v) = self.cx.vertices[c];
                    match (ca.iter().position(|&x| x == u), cb.iter().position(|&x| x == v)) {
                        (Some(i), Some(j)) => w[i] == wb[j],
                        _ => false,
                    }
                })
            })
        })
    }

    fn forward(&self, m: usize, w: [Q; 3]) -> Sample {
        let t = self.mesh.triangles[m];
        let q = self.map.apply(t, &w);
        let Some(pre) = self.preimages(&q) else { return Sample::Skipped };
        let located: Vec<Vec<(usize, [Q; 3])>> = pre.iter().map(|x| self.located(&q, x)).collect();
        let mut pairs = 0;
        let mut failures = Vec::new();
        for (i, x) in pre.iter().enumerate() {
            for (j, y) in pre.iter().enumerate() {
                if i == j {
                    continue;
                }
                pairs += 1;
                if !self.covered(&located[i], &located[j]) {
                    failures.push(format!(
                        "pair over image point {:?} from mesh triangles {} and {} is not in the complex",
                        p2_to_f64(&q),
                        x.0,
                        y.0
                    ));
                }
            }
        }
        Sample::Checked { pairs, failures }
    }

    fn reverse(&self, t: usize, w: [Q; 3]) -> Option<String> {
        let tri = self.cx.triangles[t];
        let a = combine3(&w, tri.corners.map(|c| &self.ind.vertices[self.cx.vertices[c].0]));
        let b = combine3(&w, tri.corners.map(|c| &self.ind.vertices[self.cx.vertices[c].1]));
        let fa = self.affine[self.ind.parent[tri.first]].apply(&a);
        let fb = self.affine[self.ind.parent[tri.second]].apply(&b);
        (fa != fb).then(|| format!("point of complex triangle {t} is not a pair of f-neighbors"))
    }
}

/// Checks the complex against a direct enumeration of f-neighbors: random image
/// points have every ordered pair of distinct preimages in the complex, and random
/// points of the complex are f-neighbors. All membership tests are exact.
pub fn oracle_check(
    mesh: &SurfaceMesh,
    map: &PlanarMap,
    ind: &InducedTriangulation,
    cx: &NeighborComplex,
    n: usize,
    seed: u64,
) -> OracleReport {
    let oracle = Oracle::new(mesh, map, ind, cx);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6f72_6163_6c65);
    let areas: Vec<f64> = mesh
        .triangles
        .iter()
        .map(|t| exact::to_f64(&exact::orient2d_value(&map.images[t[0]], &map.images[t[1]], &map.images[t[2]]).abs()))
        .collect();
    let total: f64 = areas.iter().sum();
    let pick_triangle = |rng: &mut ChaCha8Rng| {
        let mut x = rng.gen::<f64>() * total;
        for (m, a) in areas.iter().enumerate() {
            if x < *a {
                return m;
            }
            x -= a;
        }
        areas.len() - 1
    };

    let mut samples = 0;
    let mut skipped = 0;
    let mut preimage_pairs = 0;
    let mut counterexamples = Vec::new();
    let mut failed = false;
    for _round in 0..4 {
        let need = n - samples;
        if need == 0 {
            break;
        }
        let draws: Vec<(usize, [Q; 3])> = (0..need).map(|_| (pick_triangle(&mut rng), random_weights(&mut rng))).collect();
        let results: Vec<Sample> = draws.into_par_iter().map(|(m, w)| oracle.forward(m, w)).collect();
        for r in results {
            match r {
                Sample::Skipped => skipped += 1,
                Sample::Checked { pairs, failures } => {
                    samples += 1;
                    preimage_pairs += pairs;
                    failed |= !failures.is_empty();
                    let room = MAX_COUNTEREXAMPLES.saturating_sub(counterexamples.len());
                    counterexamples.extend(failures.into_iter().take(room));
                }
            }
        }
    }

    let reverse_draws: Vec<(usize, [Q; 3])> = if cx.triangles.is_empty() {
        Vec::new()
    } else {
        (0..n).map(|_| (rng.gen_range(0..cx.triangles.len()), random_weights(&mut rng))).collect()
    };
    let reverse_samples = reverse_draws.len();
    let reverse: Vec<Option<String>> = reverse_draws.into_par_iter().map(|(t, w)| oracle.reverse(t, w)).collect();
    for r in reverse.into_iter().flatten() {
        failed = true;
        if counterexamples.len() < MAX_COUNTEREXAMPLES {
            counterexamples.push(r);
        }
    }
    OracleReport { samples, skipped, preimage_pairs, reverse_samples, counterexamples, passed: !failed && samples == n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::build_pslg;
    use crate::cdt::{constrained_delaunay, restrict_to_image};
    use crate::complex::build_complex;
    use crate::fixtures;
    use crate::induced::pull_back;

    #[test]
    fn tetrahedron_passes_and_negative_control_fails() {
        let mesh = fixtures::tetrahedron();
        let map = fixtures::projection_xy(&mesh);
        let tri = restrict_to_image(constrained_delaunay(&build_pslg(&mesh, &map).unwrap()).unwrap(), &mesh, &map);
        let ind = pull_back(&tri, &mesh, &map).unwrap();
        let cx = build_complex(&ind, &tri);
        let report = oracle_check(&mesh, &map, &ind, &cx, 2000, 1);
        assert!(report.passed, "{report:?}");
        assert_eq!(report.preimage_pairs, 2 * report.samples);

        let mut tris = cx.triangles.clone();
        tris.remove(0);
        let broken = NeighborComplex::from_triangles(&ind, tris, cx.vertices.clone());
        let report = oracle_check(&mesh, &map, &ind, &broken, 2000, 1);
        assert!(!report.passed);
        assert!(!report.counterexamples.is_empty());
    }
}
