//! Hexahedral FEM meshes to oriented triangle surfaces.

mod boundary;
mod hex;
mod io;
mod trimesh;

pub use boundary::{
    extract_boundary, hex_to_surface, orient_consistently, triangulate_quads, BoundaryQuad,
    HexSurface, OrientReport, Strictness,
};
pub use hex::{HexMesh, HEX_FACES, NODE_XI};
pub use io::{read_fem_deck, read_neutral, write_neutral, NeutralMesh};
pub use trimesh::{edge_key, TriMesh};

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("{what} {index} references a missing vertex")]
    IndexOutOfRange { what: &'static str, index: usize },
    #[error("degenerate mesh: {0}")]
    Degenerate(String),
    #[error("element {element} has non-positive centroid Jacobian {jacobian}")]
    NonPositiveJacobian { element: u64, jacobian: f64 },
    #[error("face {face:?} is shared by more than two elements")]
    NonManifoldInput { face: [usize; 4] },
    #[error("centroid rule and edge consistency disagree on {edges} edges")]
    OrientationConflict { edges: usize },
    #[error("surface is not orientable")]
    NonOrientable,
    #[error("expected {expected} entries, found {found}")]
    CardinalityMismatch { expected: usize, found: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Triangles of `surface` whose three vertices are all sensing nodes. Falls
/// back to triangles facing +z when the mesh has no sensing set.
pub fn sensing_triangles(surface: &HexSurface, hex: &HexMesh) -> Vec<usize> {
    match &hex.sensing_nodes {
        Some(s) => {
            let mut flag = vec![false; hex.nodes.len()];
            for &i in s {
                flag[i] = true;
            }
            (0..surface.mesh.triangles.len())
                .filter(|&t| {
                    surface.mesh.triangles[t]
                        .iter()
                        .all(|&v| flag[surface.node_of_vertex[v]])
                })
                .collect()
        }
        None => surface
            .mesh
            .face_normals()
            .iter()
            .enumerate()
            .filter(|(_, n)| n.z > 0.5)
            .map(|(t, _)| t)
            .collect(),
    }
}
