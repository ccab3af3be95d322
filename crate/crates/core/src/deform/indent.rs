//! Approximate indentation: push surface vertices out of a rigid indenter
//! and smooth the displacement field so it decays around the contact.

use std::collections::HashMap;

use super::settings::{DeformSettings, ProjectionMode};
use super::DeformError;
use crate::geometry::{GelPad, Indenter};
use crate::math::Vec3;
use crate::meshconvert::{HexMesh, TriMesh};

/// Provenance tag for meshes produced here.
pub const APPROXIMATE_SOURCE: &str = "approximate-deformer";
/// Provenance tag for meshes read from external FEM output.
pub const EXTERNAL_SOURCE: &str = "external-fem";

#[derive(Debug, Clone, PartialEq)]
pub struct IndentReport {
    /// Indenter pose after the prescribed displacement.
    pub indenter: Indenter,
    /// Distance travelled along the approach direction.
    pub travel: f64,
    pub max_displacement: f64,
    /// Width of the original surface's intersection with the indenter,
    /// measured across `width_direction`.
    pub imprint_width: f64,
    pub width_direction: Vec3,
    pub penetrating_vertices: usize,
    /// Per-vertex scalar displacement along each vertex's push direction.
    pub displacement: Vec<f64>,
    pub directions: Vec<Vec3>,
    pub source: &'static str,
}

/// Distance along `dir` from `p` to the first point with non-negative
/// signed distance. Zero if `p` is already outside.
fn exit_distance(ind: &Indenter, p: &Vec3, dir: &Vec3) -> f64 {
    let d0 = ind.signed_distance(p);
    if d0 >= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = -d0;
    let mut guard = 0;
    while ind.signed_distance(&(p + dir * hi)) < 0.0 {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return f64::INFINITY;
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ind.signed_distance(&(p + dir * mid)) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn push_directions(surface: &TriMesh, approach: &Vec3, mode: ProjectionMode) -> Vec<Vec3> {
    match mode {
        ProjectionMode::Vertical => vec![*approach; surface.vertices.len()],
        ProjectionMode::Normal => surface
            .vertex_normals()
            .into_iter()
            .map(|n| if n.norm() > 0.0 { -n } else { *approach })
            .collect(),
    }
}

fn required(surface: &TriMesh, ind: &Indenter, dirs: &[Vec3]) -> Vec<f64> {
    let (lo, hi) = ind.bounds();
    surface
        .vertices
        .iter()
        .zip(dirs)
        .map(|(v, d)| {
            if (0..3).any(|k| v[k] < lo[k] - 1e-9 || v[k] > hi[k] + 1e-9) {
                0.0
            } else {
                exit_distance(ind, v, d)
            }
        })
        .collect()
}

fn max_required(surface: &TriMesh, ind: &Indenter, dirs: &[Vec3]) -> f64 {
    required(surface, ind, dirs).into_iter().fold(0.0, f64::max)
}

/// Non-negative cotangent weights per vertex, falling back to uniform
/// weights when all cotangents vanish.
pub fn cotangent_neighbours(mesh: &TriMesh) -> Vec<Vec<(usize, f64)>> {
    let mut w: Vec<HashMap<usize, f64>> = vec![HashMap::new(); mesh.vertices.len()];
    for tri in &mesh.triangles {
        for k in 0..3 {
            let (i, j, o) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let (a, b) = (
                mesh.vertices[i] - mesh.vertices[o],
                mesh.vertices[j] - mesh.vertices[o],
            );
            let cross = a.cross(&b).norm();
            let cot = if cross > 0.0 { a.dot(&b) / cross } else { 0.0 };
            let c = 0.5 * cot.max(0.0);
            *w[i].entry(j).or_insert(0.0) += c;
            *w[j].entry(i).or_insert(0.0) += c;
        }
    }
    w.into_iter()
        .map(|m| {
            let mut v: Vec<(usize, f64)> = m.into_iter().collect();
            v.sort_unstable_by_key(|e| e.0);
            if v.iter().all(|e| e.1 <= 0.0) {
                for e in &mut v {
                    e.1 = 1.0;
                }
            }
            v
        })
        .collect()
}

/// Smooths the field toward its weighted neighbour mean while never letting
/// it drop below the obstacle `floor`.
fn smooth_with_obstacle(
    floor: &[f64],
    nb: &[Vec<(usize, f64)>],
    iterations: usize,
    weight: f64,
) -> Vec<f64> {
    let mut cur = floor.to_vec();
    let mut next = cur.clone();
    for _ in 0..iterations {
        for i in 0..cur.len() {
            let (mut s, mut ws) = (0.0, 0.0);
            for &(j, w) in &nb[i] {
                s += w * cur[j];
                ws += w;
            }
            let mean = if ws > 0.0 { s / ws } else { cur[i] };
            next[i] = ((1.0 - weight) * cur[i] + weight * mean).max(floor[i]);
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Translates `indenter` along `approach` until the largest required vertex
/// push equals `depth`, then deforms the surface.
pub fn indent_surface(
    surface: &TriMesh,
    indenter: &Indenter,
    approach: Vec3,
    depth: f64,
    settings: &DeformSettings,
) -> Result<(TriMesh, IndentReport), DeformError> {
    settings.validate()?;
    indenter
        .validate()
        .map_err(|e| DeformError::InvalidParams(e.to_string()))?;
    if !(depth >= 0.0 && depth.is_finite()) {
        return Err(DeformError::InvalidParams(format!(
            "depth {depth} must be non-negative"
        )));
    }
    let approach = approach
        .try_normalize(1e-12)
        .ok_or_else(|| DeformError::InvalidParams("approach direction is zero".into()))?;
    let dirs = push_directions(surface, &approach, settings.projection_mode);
    let n = surface.vertices.len();
    if depth == 0.0 {
        return Ok((
            surface.clone(),
            IndentReport {
                indenter: *indenter,
                travel: 0.0,
                max_displacement: 0.0,
                imprint_width: 0.0,
                width_direction: width_direction(indenter, &approach),
                penetrating_vertices: 0,
                displacement: vec![0.0; n],
                directions: dirs,
                source: APPROXIMATE_SOURCE,
            },
        ));
    }

    // Bracket the travel, then bisect on the monotone max push.
    let f = |s: f64| max_required(surface, &indenter.translated(approach * s), &dirs);
    let (mut lo, mut hi) = (0.0, depth.max(1e-3));
    if f(lo) >= depth {
        let mut step = depth.max(1e-3);
        loop {
            lo -= step;
            step *= 2.0;
            if f(lo) < depth {
                break;
            }
            if step > 1e9 {
                return Err(DeformError::IndenterSwallowsMesh { fraction: 1.0 });
            }
        }
        hi = lo + step / 2.0;
    }
    // Doubling alone can step over a thin indenter, so the stride is capped
    // by its extent along the approach. Past `limit` it has left the surface.
    let (blo, bhi) = indenter.bounds();
    let corners = (0..8).map(|c| {
        Vec3::from_fn(|k, _| if c >> k & 1 == 0 { blo[k] } else { bhi[k] }).dot(&approach)
    });
    let (cmin, cmax) = corners.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    let stride = depth.max(0.25 * (cmax - cmin));
    let vmax = surface
        .vertices
        .iter()
        .map(|v| v.dot(&approach))
        .fold(f64::NEG_INFINITY, f64::max);
    let limit = vmax - cmin;
    while f(hi) < depth {
        lo = hi;
        hi += hi.abs().min(stride).max(1e-3);
        if hi > limit {
            return Err(DeformError::NoContact);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < depth {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Prefer the pose whose max push is closest to the target.
    let travel = if (f(lo) - depth).abs() <= (f(hi) - depth).abs() {
        lo
    } else {
        hi
    };
    let posed = indenter.translated(approach * travel);
    let p = required(surface, &posed, &dirs);
    let penetrating = p.iter().filter(|&&x| x > 0.0).count();
    if penetrating * 2 > n {
        return Err(DeformError::IndenterSwallowsMesh {
            fraction: penetrating as f64 / n as f64,
        });
    }

    let nb = cotangent_neighbours(surface);
    let mut delta = smooth_with_obstacle(
        &p,
        &nb,
        settings.smoothing_iterations,
        settings.smoothing_weight,
    );
    let mut out = surface.clone();
    for i in 0..n {
        out.vertices[i] = surface.vertices[i] + dirs[i] * delta[i];
    }
    // Smoothed vertices that ended up inside are pushed further out.
    for i in 0..n {
        if posed.signed_distance(&out.vertices[i]) < 0.0 {
            let extra = exit_distance(&posed, &out.vertices[i], &dirs[i]);
            delta[i] += extra;
            out.vertices[i] = surface.vertices[i] + dirs[i] * delta[i];
        }
    }
    let wdir = width_direction(&posed, &approach);
    let imprint_width = imprint_width(surface, &posed, &wdir);
    let max_displacement = delta.iter().copied().fold(0.0, f64::max);
    Ok((
        out,
        IndentReport {
            indenter: posed,
            travel,
            max_displacement,
            imprint_width,
            width_direction: wdir,
            penetrating_vertices: penetrating,
            displacement: delta,
            directions: dirs,
            source: APPROXIMATE_SOURCE,
        },
    ))
}

/// Direction across the imprint: perpendicular to the cylinder axis for
/// cylinders, otherwise the first in-plane axis.
pub fn width_direction(ind: &Indenter, approach: &Vec3) -> Vec3 {
    let fallback = crate::math::orthonormal_basis(approach).0;
    match *ind {
        Indenter::Cylinder { axis, .. } => {
            axis.cross(approach).try_normalize(1e-9).unwrap_or(fallback)
        }
        _ => {
            let x = Vec3::x() - approach * approach.x;
            x.try_normalize(1e-9).unwrap_or(fallback)
        }
    }
}

/// Extent along `dir` of the surface/indenter intersection, with the
/// boundary located on each crossing edge by bisection on the exact SDF.
pub fn imprint_width(surface: &TriMesh, ind: &Indenter, dir: &Vec3) -> f64 {
    let sd: Vec<f64> = surface
        .vertices
        .iter()
        .map(|v| ind.signed_distance(v))
        .collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut note = |p: Vec3| {
        let s = p.dot(dir);
        lo = lo.min(s);
        hi = hi.max(s);
    };
    for tri in &surface.triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if (sd[a] < 0.0) == (sd[b] < 0.0) {
                continue;
            }
            let (pin, pout) = if sd[a] < 0.0 {
                (surface.vertices[a], surface.vertices[b])
            } else {
                (surface.vertices[b], surface.vertices[a])
            };
            let (mut t0, mut t1) = (0.0, 1.0);
            for _ in 0..60 {
                let m = 0.5 * (t0 + t1);
                if ind.signed_distance(&(pin + (pout - pin) * m)) < 0.0 {
                    t0 = m;
                } else {
                    t1 = m;
                }
            }
            note(pin + (pout - pin) * (0.5 * (t0 + t1)));
        }
    }
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// Indents the sensing face of a generated pad and spreads the push through
/// each node column (full at the face, zero at the back).
pub fn indent_pad(
    pad: &GelPad,
    indenter: &Indenter,
    approach: Vec3,
    depth: f64,
    settings: &DeformSettings,
) -> Result<(HexMesh, TriMesh, IndentReport), DeformError> {
    let (face, report) = indent_surface(&pad.sensing_face, indenter, approach, depth, settings)?;
    let (nu, nv, nt) = pad.cells;
    let mut disp = vec![Vec3::zeros(); pad.hex.nodes.len()];
    let layer = (nu + 1) * (nv + 1);
    for (v, &node) in pad.sensing_nodes.iter().enumerate() {
        let u = face.vertices[v] - pad.sensing_face.vertices[v];
        let col = node % layer;
        for m in 0..=nt {
            disp[m * layer + col] = u * (m as f64 / nt as f64);
        }
    }
    let mut hex = pad.hex.clone();
    hex.displacements = Some(disp);
    Ok((hex, face, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_gelpad, make_indenter, GelPadSpec, IndenterKind};
    use crate::math::vec3;

    fn flat_face(w: f64, l: f64, h: f64) -> TriMesh {
        let spec = GelPadSpec::flat(w, l, 2.0)
            .with_resolution((w / h) as usize, (l / h) as usize)
            .with_layers(1);
        generate_gelpad(&spec).unwrap().sensing_face
    }

    fn cylinder() -> Indenter {
        make_indenter(
            IndenterKind::Cylinder,
            &[10.0, 60.0],
            vec3(0.0, 0.13, 14.0),
            Vec3::x(),
        )
        .unwrap()
    }

    #[test]
    fn zero_depth_is_identity() {
        let s = flat_face(10.0, 10.0, 1.0);
        let (o, r) =
            indent_surface(&s, &cylinder(), -Vec3::z(), 0.0, &DeformSettings::default()).unwrap();
        assert_eq!(o, s);
        assert_eq!(r.max_displacement, 0.0);
    }

    #[test]
    fn cylinder_depth_and_chord() {
        let s = flat_face(30.0, 40.0, 0.4);
        let st = DeformSettings::default();
        let (o, r) = indent_surface(&s, &cylinder(), -Vec3::z(), 1.0, &st).unwrap();
        let max_dev = s
            .vertices
            .iter()
            .zip(&o.vertices)
            .map(|(a, b)| a.z - b.z)
            .fold(0.0, f64::max);
        assert!((max_dev - 1.0).abs() <= 1e-6, "{max_dev}");
        let chord = 2.0 * (100.0f64 - 81.0).sqrt();
        assert!(r.imprint_width >= chord, "{} vs {chord}", r.imprint_width);
        assert!(r.imprint_width <= chord * 1.05);
        let min_sd = o
            .vertices
            .iter()
            .map(|v| r.indenter.signed_distance(v))
            .fold(f64::INFINITY, f64::min);
        assert!(min_sd >= -1e-6);
        // Topology untouched.
        assert_eq!(o.triangles, s.triangles);
    }

    #[test]
    fn displacement_decays_outside_contact() {
        let s = flat_face(30.0, 40.0, 0.4);
        let (_, r) =
            indent_surface(&s, &cylinder(), -Vec3::z(), 1.0, &DeformSettings::default()).unwrap();
        let at = |y: f64| {
            let i = s
                .vertices
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    let da = (a.1.x).abs() + (a.1.y - y).abs();
                    let db = (b.1.x).abs() + (b.1.y - y).abs();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap()
                .0;
            r.displacement[i]
        };
        let edge = 0.13 + (19.0f64).sqrt();
        assert!(at(edge + 0.4) > 0.0);
        assert!(at(edge + 0.4) > at(edge + 1.2));
        assert!(at(edge + 6.0) < 1e-3);
    }

    #[test]
    fn thin_block_far_above_is_reached() {
        let s = flat_face(16.0, 16.0, 0.5);
        let block = make_indenter(
            IndenterKind::Cuboid,
            &[8.0, 6.0, 4.0],
            vec3(0.0, 0.13, 14.0),
            Vec3::x(),
        )
        .unwrap();
        let (o, r) =
            indent_surface(&s, &block, -Vec3::z(), 0.5, &DeformSettings::default()).unwrap();
        assert!((r.travel - 12.5).abs() < 1e-6, "{}", r.travel);
        let min_z = o.vertices.iter().map(|v| v.z).fold(f64::INFINITY, f64::min);
        assert!((min_z + 0.5).abs() < 1e-6);
    }

    #[test]
    fn missing_the_surface_is_no_contact() {
        let s = flat_face(4.0, 4.0, 0.5);
        let off = make_indenter(
            IndenterKind::Sphere,
            &[1.0],
            vec3(20.0, 0.0, 5.0),
            Vec3::z(),
        )
        .unwrap();
        assert!(matches!(
            indent_surface(&s, &off, -Vec3::z(), 0.5, &DeformSettings::default()),
            Err(DeformError::NoContact)
        ));
    }

    #[test]
    fn swallowing_is_rejected() {
        let s = flat_face(4.0, 4.0, 0.5);
        let big = make_indenter(
            IndenterKind::Sphere,
            &[50.0],
            vec3(0.0, 0.0, 60.0),
            Vec3::z(),
        )
        .unwrap();
        assert!(matches!(
            indent_surface(&s, &big, -Vec3::z(), 2.0, &DeformSettings::default()),
            Err(DeformError::IndenterSwallowsMesh { .. })
        ));
    }

    #[test]
    fn pad_columns_follow_surface() {
        let spec = GelPadSpec::flat(10.0, 12.0, 3.0)
            .with_resolution(10, 12)
            .with_layers(3);
        let pad = generate_gelpad(&spec).unwrap();
        let sph =
            make_indenter(IndenterKind::Sphere, &[4.0], vec3(0.0, 0.0, 8.0), Vec3::z()).unwrap();
        let (hex, face, _) =
            indent_pad(&pad, &sph, -Vec3::z(), 0.8, &DeformSettings::default()).unwrap();
        let moved = hex.apply_displacements().unwrap();
        for (v, &node) in pad.sensing_nodes.iter().enumerate() {
            assert!((moved.nodes[node] - face.vertices[v]).norm() < 1e-12);
        }
        moved.validate().unwrap();
    }
}
