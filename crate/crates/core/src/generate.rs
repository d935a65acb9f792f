//! Seeded instance generators: convex hulls of random points and the two map
//! regimes (a rotated orthogonal projection, and random vertex images).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{check_general_position, PlanarMap};
use crate::error::{Error, Result};
use crate::exact::{q, Point2, Q};
use crate::mesh::SurfaceMesh;

/// Which kind of planar map to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Projection,
    RandomImages,
}

impl std::str::FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projection" => Ok(MapKind::Projection),
            "random-images" => Ok(MapKind::RandomImages),
            other => Err(Error::Config(format!("unknown generator {other:?}"))),
        }
    }
}

impl std::fmt::Display for MapKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MapKind::Projection => "projection",
            MapKind::RandomImages => "random-images",
        })
    }
}

const HULL_RADIUS: f64 = 1000.0;
const RETRIES: usize = 100;
/// Denominator used to turn rotation matrix entries into rationals.
const ROTATION_DENOMINATOR: i64 = 1 << 20;
const IMAGE_RANGE: i64 = 1_000_000;

fn orient3d_i(a: [i64; 3], b: [i64; 3], c: [i64; 3], d: [i64; 3]) -> i128 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]].map(i128::from);
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]].map(i128::from);
    let w = [d[0] - a[0], d[1] - a[1], d[2] - a[2]].map(i128::from);
    u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) + u[2] * (v[0] * w[1] - v[1] * w[0])
}

/// Convex hull of integer points in general position (no four coplanar),
/// returned with outward-wound triangles over the hull vertices only.
pub fn convex_hull(points: &[[i64; 3]]) -> Result<SurfaceMesh> {
    let n = points.len();
    if n < 4 {
        return Err(Error::Topology("a hull needs at least 4 points".into()));
    }
    let p = points;
    let (i0, i1) = (0, 1);
    let i2 = (2..n)
        .find(|&i| {
            let u = [p[i1][0] - p[i0][0], p[i1][1] - p[i0][1], p[i1][2] - p[i0][2]];
            let v = [p[i][0] - p[i0][0], p[i][1] - p[i0][1], p[i][2] - p[i0][2]];
            u[1] * v[2] != u[2] * v[1] || u[0] * v[2] != u[2] * v[0] || u[0] * v[1] != u[1] * v[0]
        })
        .ok_or_else(|| Error::Topology("points are collinear".into()))?;
    let i3 = (2..n)
        .find(|&i| i != i2 && orient3d_i(p[i0], p[i1], p[i2], p[i]) != 0)
        .ok_or_else(|| Error::Topology("points are coplanar".into()))?;
    let mut faces: Vec<[usize; 3]> = if orient3d_i(p[i0], p[i1], p[i2], p[i3]) < 0 {
        vec![[i0, i1, i2], [i0, i3, i1], [i1, i3, i2], [i2, i3, i0]]
    } else {
        vec![[i0, i2, i1], [i0, i1, i3], [i1, i2, i3], [i2, i0, i3]]
    };
    for i in 0..n {
        if [i0, i1, i2, i3].contains(&i) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| orient3d_i(p[f[0]], p[f[1]], p[f[2]], p[i]) > 0).collect();
        if faces.iter().any(|f| orient3d_i(p[f[0]], p[f[1]], p[f[2]], p[i]) == 0) {
            return Err(Error::Topology(format!("point {i} is coplanar with a hull face")));
        }
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut directed: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, v)| **v) {
            for k in 0..3 {
                directed.insert((f[k], f[(k + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> = directed.iter().copied().filter(|&(a, b)| !directed.contains(&(b, a))).collect();
        faces = faces.into_iter().zip(visible).filter(|(_, v)| !v).map(|(f, _)| f).collect();
        for (a, b) in horizon {
            faces.push([a, b, i]);
        }
    }
    let used: BTreeSet<usize> = faces.iter().flatten().copied().collect();
    let remap: BTreeMap<usize, usize> = used.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let vertices = used.iter().map(|&i| p[i].map(|x| q(x))).collect();
    let triangles = faces.iter().map(|f| f.map(|v| remap[&v])).collect();
    SurfaceMesh::new(vertices, triangles)
}

fn no_four_coplanar(points: &[[i64; 3]]) -> bool {
    let n = points.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    if orient3d_i(points[a], points[b], points[c], points[d]) == 0 {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Convex hull of `n` seeded random points near a sphere, retried until the points
/// are in general position.
pub fn random_hull(n: usize, rng: &mut ChaCha8Rng) -> Result<SurfaceMesh> {
    for _ in 0..RETRIES {
        let points: Vec<[i64; 3]> = (0..n)
            .map(|_| {
                let d = unit_vector(rng);
                d.map(|x| (x * HULL_RADIUS).round() as i64)
            })
            .collect();
        let distinct: BTreeSet<[i64; 3]> = points.iter().copied().collect();
        if distinct.len() != n || !no_four_coplanar(&points) {
            continue;
        }
        if let Ok(mesh) = convex_hull(&points) {
            return Ok(mesh);
        }
    }
    Err(Error::Config(format!("could not generate a hull of {n} points")))
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

fn to_rational(x: f64, denominator: i64) -> Q {
    Q::new(BigInt::from((x * denominator as f64).round() as i64), BigInt::from(denominator))
}

/// Uniformly random rotation followed by dropping the third coordinate. The two
/// kept rows are rounded to rationals, so the map stays exactly linear.
pub fn projection_map(mesh: &SurfaceMesh, rng: &mut ChaCha8Rng) -> Result<PlanarMap> {
    for _ in 0..RETRIES {
        // Uniform unit quaternion (Shoemake).
        let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
        let tau = std::f64::consts::TAU;
        let (x, y, z, w) = (
            (1.0 - u1).sqrt() * (tau * u2).sin(),
            (1.0 - u1).sqrt() * (tau * u2).cos(),
            u1.sqrt() * (tau * u3).sin(),
            u1.sqrt() * (tau * u3).cos(),
        );
        let rows = [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
            [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        ];
        let rows: Vec<[Q; 3]> = rows.iter().map(|r| r.map(|v| to_rational(v, ROTATION_DENOMINATOR))).collect();
        let images: Vec<Point2> = mesh
            .vertices
            .iter()
            .map(|v| {
                let dot = |r: &[Q; 3]| &r[0] * &v[0] + &r[1] * &v[1] + &r[2] * &v[2];
                [dot(&rows[0]), dot(&rows[1])]
            })
            .collect();
        let map = PlanarMap::new(images);
        if check_general_position(mesh, &map).passed {
            return Ok(map);
        }
    }
    Err(Error::Config("no projection in general position found".into()))
}

/// Vertex images drawn uniformly from an integer square, rejected until in general position.
pub fn random_image_map(mesh: &SurfaceMesh, rng: &mut ChaCha8Rng) -> Result<PlanarMap> {
    for _ in 0..RETRIES {
        let images = (0..mesh.vertices.len())
            .map(|_| [q(rng.gen_range(0..IMAGE_RANGE)), q(rng.gen_range(0..IMAGE_RANGE))])
            .collect();
        let map = PlanarMap::new(images);
        if check_general_position(mesh, &map).passed {
            return Ok(map);
        }
    }
    Err(Error::Config("no random image map in general position found".into()))
}

pub fn generate_map(mesh: &SurfaceMesh, kind: MapKind, seed: u64) -> Result<PlanarMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    match kind {
        MapKind::Projection => projection_map(mesh, &mut rng),
        MapKind::RandomImages => random_image_map(mesh, &mut rng),
    }
}

/// A seeded hull of `points` random points together with a generated map.
pub fn generate_instance(points: usize, kind: MapKind, seed: u64) -> Result<(SurfaceMesh, PlanarMap)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = random_hull(points, &mut rng)?;
    let map = generate_map(&mesh, kind, seed)?;
    Ok((mesh, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate_surface;

    #[test]
    fn hulls_are_valid_convex_spheres() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mesh = random_hull(8 + 4 * seed as usize, &mut rng).unwrap();
            let report = validate_surface(&mesh);
            assert!(report.passed, "{report:?}");
            assert_eq!(mesh.euler_characteristic(), 2);
            assert!(mesh.vertices.len() >= 4);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let (m1, f1) = generate_instance(12, MapKind::RandomImages, 3).unwrap();
        let (m2, f2) = generate_instance(12, MapKind::RandomImages, 3).unwrap();
        assert_eq!(m1.vertices, m2.vertices);
        assert_eq!(f1, f2);
        let (m, f) = generate_instance(12, MapKind::Projection, 3).unwrap();
        assert!(check_general_position(&m, &f).passed);
    }
}
