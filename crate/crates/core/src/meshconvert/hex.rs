use crate::math::Vec3;
use nalgebra::Matrix3;

use super::MeshError;

/// Natural coordinates of the eight nodes in standard trilinear ordering.
pub const NODE_XI: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// Local node indices of the six faces, wound outward for an element with
/// positive Jacobian.
pub const HEX_FACES: [[usize; 4]; 6] = [
    [0, 3, 2, 1],
    [4, 5, 6, 7],
    [0, 1, 5, 4],
    [1, 2, 6, 5],
    [2, 3, 7, 6],
    [3, 0, 4, 7],
];

/// Volumetric mesh of 8-node hexahedra.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HexMesh {
    pub nodes: Vec<Vec3>,
    pub elements: Vec<[usize; 8]>,
    /// Per-node displacement, same length as `nodes` when present.
    pub displacements: Option<Vec<Vec3>>,
    /// External node labels (1-based in files). Empty means `index + 1`.
    pub node_ids: Vec<u64>,
    pub element_ids: Vec<u64>,
    /// Node indices lying on the sensing face, when known.
    pub sensing_nodes: Option<Vec<usize>>,
}

fn shape_derivatives(xi: [f64; 3]) -> [[f64; 3]; 8] {
    let mut d = [[0.0; 3]; 8];
    for (a, n) in NODE_XI.iter().enumerate() {
        let f = [1.0 + n[0] * xi[0], 1.0 + n[1] * xi[1], 1.0 + n[2] * xi[2]];
        d[a] = [
            n[0] * f[1] * f[2] / 8.0,
            f[0] * n[1] * f[2] / 8.0,
            f[0] * f[1] * n[2] / 8.0,
        ];
    }
    d
}

impl HexMesh {
    pub fn new(nodes: Vec<Vec3>, elements: Vec<[usize; 8]>) -> Result<Self, MeshError> {
        let mesh = Self {
            nodes,
            elements,
            ..Default::default()
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn with_displacements(mut self, d: Vec<Vec3>) -> Result<Self, MeshError> {
        if d.len() != self.nodes.len() {
            return Err(MeshError::CardinalityMismatch {
                expected: self.nodes.len(),
                found: d.len(),
            });
        }
        self.displacements = Some(d);
        Ok(self)
    }

    pub fn node_label(&self, i: usize) -> u64 {
        self.node_ids.get(i).copied().unwrap_or(i as u64 + 1)
    }

    pub fn element_label(&self, e: usize) -> u64 {
        self.element_ids.get(e).copied().unwrap_or(e as u64 + 1)
    }

    pub fn element_points(&self, e: usize) -> [Vec3; 8] {
        self.elements[e].map(|i| self.nodes[i])
    }

    pub fn centroid(&self, e: usize) -> Vec3 {
        self.element_points(e).iter().sum::<Vec3>() / 8.0
    }

    /// Jacobian matrix d(x)/d(xi) at natural coordinates `xi`.
    pub fn jacobian_at(&self, e: usize, xi: [f64; 3]) -> Matrix3<f64> {
        let pts = self.element_points(e);
        let d = shape_derivatives(xi);
        let mut j = Matrix3::zeros();
        for a in 0..8 {
            for r in 0..3 {
                for c in 0..3 {
                    j[(r, c)] += pts[a][r] * d[a][c];
                }
            }
        }
        j
    }

    pub fn centroid_jacobian(&self, e: usize) -> f64 {
        self.jacobian_at(e, [0.0; 3]).determinant()
    }

    /// Element volume by 2×2×2 Gauss quadrature (exact for trilinear maps).
    pub fn element_volume(&self, e: usize) -> f64 {
        let g = 1.0 / 3f64.sqrt();
        let mut v = 0.0;
        for sx in [-g, g] {
            for sy in [-g, g] {
                for sz in [-g, g] {
                    v += self.jacobian_at(e, [sx, sy, sz]).determinant();
                }
            }
        }
        v
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.elements.len())
            .map(|e| self.element_volume(e))
            .sum()
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.nodes.len();
        if let Some(d) = &self.displacements {
            if d.len() != n {
                return Err(MeshError::CardinalityMismatch {
                    expected: n,
                    found: d.len(),
                });
            }
        }
        if !self.node_ids.is_empty() && self.node_ids.len() != n {
            return Err(MeshError::CardinalityMismatch {
                expected: n,
                found: self.node_ids.len(),
            });
        }
        if !self.element_ids.is_empty() && self.element_ids.len() != self.elements.len() {
            return Err(MeshError::CardinalityMismatch {
                expected: self.elements.len(),
                found: self.element_ids.len(),
            });
        }
        if let Some(s) = &self.sensing_nodes {
            if let Some(&bad) = s.iter().find(|&&i| i >= n) {
                return Err(MeshError::IndexOutOfRange {
                    what: "sensing node",
                    index: bad,
                });
            }
        }
        for (e, conn) in self.elements.iter().enumerate() {
            if conn.iter().any(|&i| i >= n) {
                return Err(MeshError::IndexOutOfRange {
                    what: "element",
                    index: e,
                });
            }
            let mut sorted = *conn;
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(MeshError::Degenerate(format!(
                    "element {} repeats a node",
                    self.element_label(e)
                )));
            }
            let j = self.centroid_jacobian(e);
            if !(j > 0.0) {
                return Err(MeshError::NonPositiveJacobian {
                    element: self.element_label(e),
                    jacobian: j,
                });
            }
        }
        Ok(())
    }

    /// Node-wise translation by the displacement field; connectivity is kept.
    pub fn apply_displacements(&self) -> Result<HexMesh, MeshError> {
        let d = self
            .displacements
            .as_ref()
            .ok_or(MeshError::CardinalityMismatch {
                expected: self.nodes.len(),
                found: 0,
            })?;
        if d.len() != self.nodes.len() {
            return Err(MeshError::CardinalityMismatch {
                expected: self.nodes.len(),
                found: d.len(),
            });
        }
        let mut out = self.clone();
        for (p, u) in out.nodes.iter_mut().zip(d) {
            *p += u;
        }
        out.displacements = None;
        Ok(out)
    }

    /// Rectilinear block of hexahedra with node coordinates taken from the
    /// given monotone axis ticks.
    pub fn structured(xs: &[f64], ys: &[f64], zs: &[f64]) -> Result<HexMesh, MeshError> {
        if xs.len() < 2 || ys.len() < 2 || zs.len() < 2 {
            return Err(MeshError::Degenerate(
                "a structured grid needs two ticks per axis".into(),
            ));
        }
        let (nx, ny) = (xs.len(), ys.len());
        let idx = |i: usize, j: usize, k: usize| (k * ny + j) * nx + i;
        let mut nodes = Vec::with_capacity(nx * ny * zs.len());
        for &z in zs {
            for &y in ys {
                for &x in xs {
                    nodes.push(Vec3::new(x, y, z));
                }
            }
        }
        let mut elements = Vec::new();
        for k in 0..zs.len() - 1 {
            for j in 0..ny - 1 {
                for i in 0..nx - 1 {
                    elements.push([
                        idx(i, j, k),
                        idx(i + 1, j, k),
                        idx(i + 1, j + 1, k),
                        idx(i, j + 1, k),
                        idx(i, j, k + 1),
                        idx(i + 1, j, k + 1),
                        idx(i + 1, j + 1, k + 1),
                        idx(i, j + 1, k + 1),
                    ]);
                }
            }
        }
        HexMesh::new(nodes, elements)
    }
}
