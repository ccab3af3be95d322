use std::collections::{HashMap, VecDeque};

use super::hex::{HexMesh, HEX_FACES};
use super::trimesh::TriMesh;
use super::MeshError;
use crate::math::{triangle_cross, Vec3};

/// A hexahedron face that belongs to exactly one element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundaryQuad {
    /// Node indices, wound outward with respect to `element`.
    pub nodes: [usize; 4],
    pub element: usize,
}

/// Triangulated boundary with per-triangle owners and the hex node index of
/// every surface vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct HexSurface {
    pub mesh: TriMesh,
    pub owners: Vec<usize>,
    pub node_of_vertex: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Edge-consistency conflicts after the centroid rule are errors.
    #[default]
    Strict,
    /// Conflicts are resolved by flipping the minority orientation class.
    Repair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OrientReport {
    /// Triangles flipped to satisfy the centroid rule.
    pub rewound: usize,
    /// Triangles flipped afterwards to restore edge consistency.
    pub repaired: usize,
}

fn face_key(q: &[usize; 4]) -> [usize; 4] {
    let mut k = *q;
    k.sort_unstable();
    k
}

/// Faces used by exactly one element, in element-major, face-minor order.
pub fn extract_boundary(hex: &HexMesh) -> Result<Vec<BoundaryQuad>, MeshError> {
    let mut count: HashMap<[usize; 4], u32> = HashMap::with_capacity(hex.elements.len() * 4);
    for conn in &hex.elements {
        for f in &HEX_FACES {
            let q = f.map(|l| conn[l]);
            *count.entry(face_key(&q)).or_insert(0) += 1;
        }
    }
    let mut out = Vec::new();
    for (e, conn) in hex.elements.iter().enumerate() {
        for f in &HEX_FACES {
            let q = f.map(|l| conn[l]);
            match count[&face_key(&q)] {
                1 => out.push(BoundaryQuad {
                    nodes: q,
                    element: e,
                }),
                2 => {}
                _ => return Err(MeshError::NonManifoldInput { face: face_key(&q) }),
            }
        }
    }
    Ok(out)
}

/// Split quads along the n0-n2 diagonal. When that diagonal leaves a
/// triangle degenerate or folded against the quad normal, the n1-n3 diagonal
/// is used instead. Vertices are the quad nodes in first-use order.
pub fn triangulate_quads(hex: &HexMesh, quads: &[BoundaryQuad]) -> HexSurface {
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut node_of_vertex = Vec::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(quads.len() * 2);
    let mut owners = Vec::with_capacity(quads.len() * 2);
    for q in quads {
        let [a, b, c, d] = q.nodes;
        let p = q.nodes.map(|i| hex.nodes[i]);
        let tris = if diagonal_ok(&p, 0) || !diagonal_ok(&p, 1) {
            [[a, b, c], [a, c, d]]
        } else {
            [[b, c, d], [b, d, a]]
        };
        for t in tris {
            let local = t.map(|n| {
                *remap.entry(n).or_insert_with(|| {
                    node_of_vertex.push(n);
                    vertices.push(hex.nodes[n]);
                    vertices.len() - 1
                })
            });
            triangles.push(local);
            owners.push(q.element);
        }
    }
    HexSurface {
        mesh: TriMesh {
            vertices,
            triangles,
        },
        owners,
        node_of_vertex,
    }
}

const AREA_EPS: f64 = 2e-12;

/// Whether splitting along diagonal (s, s+2) gives two non-degenerate
/// triangles facing the same way as the quad.
fn diagonal_ok(p: &[Vec3; 4], s: usize) -> bool {
    // Newell normal of the quad.
    let mut n = Vec3::zeros();
    for i in 0..4 {
        let (u, v) = (p[i], p[(i + 1) % 4]);
        n += Vec3::new(
            (u.y - v.y) * (u.z + v.z),
            (u.z - v.z) * (u.x + v.x),
            (u.x - v.x) * (u.y + v.y),
        );
    }
    let n = n.try_normalize(0.0).unwrap_or_else(Vec3::zeros);
    let (i0, i1, i2, i3) = (s, s + 1, (s + 2) % 4, (s + 3) % 4);
    let c1 = triangle_cross(&p[i0], &p[i1], &p[i2]);
    let c2 = triangle_cross(&p[i0], &p[i2], &p[i3]);
    c1.norm() > AREA_EPS && c2.norm() > AREA_EPS && c1.dot(&n) > 0.0 && c2.dot(&n) > 0.0
}

/// Wind each triangle so its normal points away from its owner's centroid,
/// then check that neighbours traverse shared edges in opposite directions.
pub fn orient_consistently(
    surface: &HexSurface,
    hex: &HexMesh,
    strictness: Strictness,
) -> Result<(HexSurface, OrientReport), MeshError> {
    let mut out = surface.clone();
    let mut report = OrientReport::default();
    for t in 0..out.mesh.triangles.len() {
        let [a, b, c] = out.mesh.triangle_points(t);
        let n = triangle_cross(&a, &b, &c);
        let away = (a + b + c) / 3.0 - hex.centroid(out.owners[t]);
        if n.dot(&away) < 0.0 {
            out.mesh.flip(t);
            report.rewound += 1;
        }
    }
    let bad = out.mesh.inconsistent_edges();
    if bad.is_empty() {
        return Ok((out, report));
    }
    if strictness == Strictness::Strict {
        return Err(MeshError::OrientationConflict { edges: bad.len() });
    }
    report.repaired = repair_by_majority(&mut out.mesh)?;
    Ok((out, report))
}

/// Propagates relative orientation through each edge-connected component and
/// flips the smaller class. Returns the number of flipped triangles.
fn repair_by_majority(mesh: &mut TriMesh) -> Result<usize, MeshError> {
    let adj = mesh.triangle_adjacency();
    let n = mesh.triangles.len();
    let mut parity: Vec<Option<bool>> = vec![None; n];
    let mut flips = 0;
    for seed in 0..n {
        if parity[seed].is_some() {
            continue;
        }
        parity[seed] = Some(false);
        let mut comp = vec![seed];
        let mut queue = VecDeque::from([seed]);
        while let Some(t) = queue.pop_front() {
            let pt = parity[t].unwrap_or(false);
            for &(nb, consistent) in &adj[t] {
                let want = if consistent { pt } else { !pt };
                match parity[nb] {
                    None => {
                        parity[nb] = Some(want);
                        comp.push(nb);
                        queue.push_back(nb);
                    }
                    Some(p) if p != want => return Err(MeshError::NonOrientable),
                    _ => {}
                }
            }
        }
        let odd: Vec<usize> = comp
            .iter()
            .copied()
            .filter(|&t| parity[t] == Some(true))
            .collect();
        let flip_odd = odd.len() * 2 <= comp.len();
        for &t in &comp {
            if (parity[t] == Some(true)) == flip_odd {
                mesh.flip(t);
                flips += 1;
            }
        }
    }
    Ok(flips)
}

/// Full conversion: boundary extraction, triangulation and orientation.
pub fn hex_to_surface(
    hex: &HexMesh,
    strictness: Strictness,
) -> Result<(HexSurface, OrientReport), MeshError> {
    hex.validate()?;
    let quads = extract_boundary(hex)?;
    let tris = triangulate_quads(hex, &quads);
    orient_consistently(&tris, hex, strictness)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(n: usize) -> HexMesh {
        let t: Vec<f64> = (0..=n).map(|i| i as f64).collect();
        HexMesh::structured(&t, &t, &t).unwrap()
    }

    #[test]
    fn single_hex() {
        let h = block(1);
        let q = extract_boundary(&h).unwrap();
        assert_eq!(q.len(), 6);
        let (s, r) = hex_to_surface(&h, Strictness::Strict).unwrap();
        assert_eq!(s.mesh.triangles.len(), 12);
        assert_eq!(s.mesh.vertices.len(), 8);
        assert_eq!(r, OrientReport::default());
        assert!((s.mesh.signed_volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn block_2x2x2() {
        let h = block(2);
        assert_eq!(extract_boundary(&h).unwrap().len(), 24);
        let (s, _) = hex_to_surface(&h, Strictness::Strict).unwrap();
        assert_eq!(s.mesh.triangles.len(), 48);
        assert_eq!(s.mesh.vertices.len(), 26);
        assert!((s.mesh.signed_volume() - 8.0).abs() < 1e-12);
        assert!(s.mesh.is_watertight());
        assert_eq!(s.mesh.euler_characteristic(), 2);
    }

    #[test]
    fn two_hexes_sharing_a_face() {
        let h = HexMesh::structured(&[0.0, 1.0, 2.0], &[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(extract_boundary(&h).unwrap().len(), 10);
    }

    #[test]
    fn vertices_are_bitwise_node_copies() {
        let mut h = block(2);
        for (i, p) in h.nodes.iter_mut().enumerate() {
            p.x += (i as f64) * 1e-3;
        }
        let (s, _) = hex_to_surface(&h, Strictness::Strict).unwrap();
        for (v, &n) in s.mesh.vertices.iter().zip(&s.node_of_vertex) {
            assert_eq!(v.x.to_bits(), h.nodes[n].x.to_bits());
        }
    }

    #[test]
    fn non_manifold_face_is_rejected() {
        let h = block(1);
        let mut twice = h.clone();
        twice.elements.push(h.elements[0]);
        twice.elements.push(h.elements[0]);
        assert!(matches!(
            extract_boundary(&twice),
            Err(MeshError::NonManifoldInput { .. })
        ));
    }

    #[test]
    fn non_convex_quad_uses_interior_diagonal() {
        // Planar dart with the reflex vertex at n1, so n0-n2 lies outside.
        let nodes = vec![
            Vec3::new(4.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 4.0, 0.0),
            Vec3::new(0.0, 0.0, 0.0),
        ];
        let hex = HexMesh {
            nodes,
            ..Default::default()
        };
        let q = BoundaryQuad {
            nodes: [0, 1, 2, 3],
            element: 0,
        };
        let s = triangulate_quads(&hex, &[q]);
        for t in 0..2 {
            let c = s.mesh.triangle_cross(t);
            assert!(0.5 * c.norm() > 1e-12);
            assert!(c.z > 0.0);
        }
        let area: f64 = (0..2).map(|t| s.mesh.triangle_area(t)).sum();
        assert!((area - 4.0).abs() < 1e-12);
    }

    #[test]
    fn flipped_triangle_is_rewound() {
        let h = block(2);
        let quads = extract_boundary(&h).unwrap();
        let mut s = triangulate_quads(&h, &quads);
        s.mesh.flip(5);
        for mode in [Strictness::Strict, Strictness::Repair] {
            let (o, r) = orient_consistently(&s, &h, mode).unwrap();
            assert_eq!(r.rewound, 1);
            assert_eq!(r.repaired, 0);
            assert!(o.mesh.is_consistently_wound());
        }
    }

    #[test]
    fn wrong_owner_conflicts_or_repairs() {
        // A second, detached cube on the outside of the block's y=0 face.
        let mut h = block(1);
        let off = h.nodes.len();
        let far: Vec<Vec3> = h
            .nodes
            .iter()
            .map(|p| p + Vec3::new(0.0, -3.0, 0.0))
            .collect();
        h.nodes.extend(far);
        let e2 = h.elements[0].map(|i| i + off);
        h.elements.push(e2);
        let quads: Vec<_> = extract_boundary(&h)
            .unwrap()
            .into_iter()
            .filter(|q| q.element == 0)
            .collect();
        let mut s = triangulate_quads(&h, &quads);
        let t = (0..s.mesh.triangles.len())
            .find(|&t| s.mesh.triangle_points(t).iter().all(|p| p.y == 0.0))
            .unwrap();
        s.owners[t] = 1;
        assert!(matches!(
            orient_consistently(&s, &h, Strictness::Strict),
            Err(MeshError::OrientationConflict { .. })
        ));
        let (o, r) = orient_consistently(&s, &h, Strictness::Repair).unwrap();
        assert_eq!((r.rewound, r.repaired), (1, 1));
        assert!(o.mesh.is_consistently_wound());
        assert!((o.mesh.signed_volume() - 1.0).abs() < 1e-14);
    }
}
