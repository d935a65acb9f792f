//! Small hand-checkable instances.

use crate::arrangement::PlanarMap;
use crate::exact::q;
use crate::mesh::SurfaceMesh;

/// Tetrahedron (0,0,0), (4,0,0), (0,4,0), (1,1,4) with outward faces.
pub fn tetrahedron() -> SurfaceMesh {
    let v = [[0, 0, 0], [4, 0, 0], [0, 4, 0], [1, 1, 4]];
    SurfaceMesh::new(
        v.iter().map(|p| p.map(q)).collect(),
        vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [2, 0, 3]],
    )
    .expect("valid tetrahedron")
}

/// Orthogonal projection onto the xy-plane.
pub fn projection_xy(mesh: &SurfaceMesh) -> PlanarMap {
    PlanarMap::new(mesh.vertices.iter().map(|v| [v[0].clone(), v[1].clone()]).collect())
}

/// Regular octahedron with vertices at the unit points of the axes.
pub fn octahedron() -> SurfaceMesh {
    let v = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
    let faces = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    SurfaceMesh::new(v.iter().map(|p| p.map(q)).collect(), faces).expect("valid octahedron")
}

/// A generic linear map of the octahedron, so no two vertex images coincide.
pub fn octahedron_map(mesh: &SurfaceMesh) -> PlanarMap {
    let rows = [[q(5), q(2), q(1)], [q(-1), q(3), q(7)]];
    PlanarMap::new(
        mesh.vertices
            .iter()
            .map(|v| rows.clone().map(|r| &r[0] * &v[0] + &r[1] * &v[1] + &r[2] * &v[2]))
            .collect(),
    )
}
