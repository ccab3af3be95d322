use crate::math::{triangle_cross, Vec3};
use std::collections::HashMap;
use std::io::Write;

use super::MeshError;

/// Indexed triangle surface. Winding is counter-clockwise about the outward
/// normal (right-hand rule).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

/// Undirected edge key with the smaller index first.
#[inline]
pub fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let n = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(MeshError::IndexOutOfRange {
                    what: "triangle",
                    index: t,
                });
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::Degenerate(format!(
                    "triangle {t} repeats a vertex"
                )));
            }
        }
        Ok(Self {
            vertices,
            triangles,
        })
    }

    pub fn triangle_points(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    /// Twice-area vector of triangle `t`.
    pub fn triangle_cross(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangle_points(t);
        triangle_cross(&a, &b, &c)
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * self.triangle_cross(t).norm()
    }

    /// Unit normal of every triangle, following the winding. Degenerate
    /// triangles yield a zero vector.
    pub fn face_normals(&self) -> Vec<Vec3> {
        (0..self.triangles.len())
            .map(|t| {
                self.triangle_cross(t)
                    .try_normalize(0.0)
                    .unwrap_or_else(Vec3::zeros)
            })
            .collect()
    }

    /// Area-weighted vertex normals.
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        let mut acc = vec![Vec3::zeros(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let c = self.triangle_cross(t);
            for &i in tri {
                acc[i] += c;
            }
        }
        acc.into_iter()
            .map(|n| n.try_normalize(0.0).unwrap_or_else(Vec3::zeros))
            .collect()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    /// Divergence-theorem volume `Σ (a · (b × c)) / 6`; positive for a closed,
    /// outward-oriented surface.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                let (a, b, c) = (&self.vertices[a], &self.vertices[b], &self.vertices[c]);
                a.dot(&b.cross(c))
            })
            .sum::<f64>()
            / 6.0
    }

    /// Directed half-edge → triangle map.
    fn directed_edges(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut map: HashMap<(usize, usize), Vec<usize>> =
            HashMap::with_capacity(self.triangles.len() * 3);
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                map.entry((tri[k], tri[(k + 1) % 3])).or_default().push(t);
            }
        }
        map
    }

    /// Number of triangles incident to each undirected edge.
    pub fn edge_incidence(&self) -> HashMap<(usize, usize), usize> {
        let mut map = HashMap::with_capacity(self.triangles.len() * 2);
        for tri in &self.triangles {
            for k in 0..3 {
                *map.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        map
    }

    /// Every edge is shared by exactly two triangles.
    pub fn is_watertight(&self) -> bool {
        self.edge_incidence().values().all(|&c| c == 2)
    }

    /// Every edge is shared by one or two triangles.
    pub fn is_manifold_with_boundary(&self) -> bool {
        self.edge_incidence().values().all(|&c| c == 1 || c == 2)
    }

    /// Undirected edges whose two incident triangles traverse them in the
    /// same direction.
    pub fn inconsistent_edges(&self) -> Vec<(usize, usize)> {
        let directed = self.directed_edges();
        let mut bad: Vec<_> = directed
            .iter()
            .filter(|(_, ts)| ts.len() > 1)
            .map(|(&(a, b), _)| edge_key(a, b))
            .collect();
        bad.sort_unstable();
        bad.dedup();
        bad
    }

    pub fn is_consistently_wound(&self) -> bool {
        self.inconsistent_edges().is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_incidence().len()
    }

    /// Number of vertices referenced by at least one triangle.
    pub fn used_vertex_count(&self) -> usize {
        let mut used = vec![false; self.vertices.len()];
        for tri in &self.triangles {
            for &i in tri {
                used[i] = true;
            }
        }
        used.into_iter().filter(|&u| u).count()
    }

    /// `V − E + F` over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        self.used_vertex_count() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Triangle sets connected through shared edges.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let adjacency = self.triangle_adjacency();
        let mut seen = vec![false; self.triangles.len()];
        let mut out = Vec::new();
        for start in 0..self.triangles.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(t) = stack.pop() {
                comp.push(t);
                for &(n, _) in &adjacency[t] {
                    if !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// For every triangle, its edge neighbours and whether the shared edge is
    /// traversed in opposite directions (consistent winding).
    pub(crate) fn triangle_adjacency(&self) -> Vec<Vec<(usize, bool)>> {
        let mut by_edge: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                by_edge.entry(edge_key(a, b)).or_default().push((t, a < b));
            }
        }
        let mut adj = vec![Vec::new(); self.triangles.len()];
        for users in by_edge.values() {
            for i in 0..users.len() {
                for j in 0..users.len() {
                    if i != j {
                        let consistent = users[i].1 != users[j].1;
                        adj[users[i].0].push((users[j].0, consistent));
                    }
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn flip(&mut self, t: usize) {
        self.triangles[t].swap(1, 2);
    }

    /// Sub-surface made of the given triangles, with unused vertices dropped.
    /// Returns the mesh and, for every new vertex, its index in `self`.
    pub fn submesh(&self, triangle_ids: &[usize]) -> (TriMesh, Vec<usize>) {
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut old_of_new = Vec::new();
        let mut tris = Vec::with_capacity(triangle_ids.len());
        for &t in triangle_ids {
            let tri = self.triangles[t].map(|i| {
                if remap[i] == usize::MAX {
                    remap[i] = old_of_new.len();
                    old_of_new.push(i);
                }
                remap[i]
            });
            tris.push(tri);
        }
        let verts = old_of_new.iter().map(|&i| self.vertices[i]).collect();
        (
            TriMesh {
                vertices: verts,
                triangles: tris,
            },
            old_of_new,
        )
    }

    /// Axis-aligned bounds `(min, max)`; `None` for an empty mesh.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(
            self.vertices
                .iter()
                .fold((first, first), |(lo, hi), v| (lo.inf(v), hi.sup(v))),
        )
    }

    /// Appends `other`, offsetting its indices.
    pub fn append(&mut self, other: &TriMesh) {
        let off = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + off)));
    }

    /// Wavefront OBJ (vertex and face lists, 1-based).
    pub fn write_obj<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# {} vertices, {} triangles",
            self.vertices.len(),
            self.triangles.len()
        )?;
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
        }
        for t in &self.triangles {
            writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }
}
