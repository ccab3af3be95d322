use crate::geometry::Rect;
use crate::meshconvert::TriMesh;

/// Offset along the rectangle normal of a circular bow with sagitta `d` over
/// half-chord `half`, at position `s` along the chord.
pub fn bow_offset(half: f64, d: f64, s: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    let r = (half * half + d * d) / (2.0 * d);
    (r * r - s * s).max(0.0).sqrt() - (r - d)
}

/// Arc length of the bow (chord length when `d = 0`).
pub fn bow_arc_length(half: f64, d: f64) -> f64 {
    if d <= 0.0 {
        return 2.0 * half;
    }
    let r = (half * half + d * d) / (2.0 * d);
    // Half central angle θ satisfies tan(θ/2) = d / half.
    2.0 * r * 2.0 * (d / half).atan()
}

/// Bows `rect` along its u axis into a circular arc whose midpoint sits
/// `deflection` along the normal. Ends stay on the original chord.
pub fn deform_mirror(rect: &Rect, deflection: f64, segments: usize) -> TriMesh {
    let n = segments.max(1);
    let hu = rect.half_extents[0];
    let v = rect.v_axis() * rect.half_extents[1];
    let mut vertices = Vec::with_capacity(2 * (n + 1));
    for k in 0..=n {
        let s = -hu + 2.0 * hu * k as f64 / n as f64;
        let base = rect.center + rect.u_axis * s + rect.normal * bow_offset(hu, deflection, s);
        vertices.push(base - v);
        vertices.push(base + v);
    }
    let mut triangles = Vec::with_capacity(2 * n);
    for k in 0..n {
        let (a, b, c, d) = (2 * k, 2 * k + 2, 2 * k + 3, 2 * k + 1);
        triangles.push([a, b, c]);
        triangles.push([a, c, d]);
    }
    TriMesh {
        vertices,
        triangles,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;

    fn rect() -> Rect {
        Rect {
            center: Vec3::zeros(),
            normal: Vec3::z(),
            u_axis: Vec3::x(),
            half_extents: [20.0, 10.0],
        }
    }

    #[test]
    fn flat_when_undeflected() {
        let m = deform_mirror(&rect(), 0.0, 8);
        assert!(m.vertices.iter().all(|v| v.z == 0.0));
        assert!(m
            .face_normals()
            .iter()
            .all(|n| (n - Vec3::z()).norm() < 1e-12));
    }

    #[test]
    fn sagitta_at_midpoint() {
        let m = deform_mirror(&rect(), 1.5, 8);
        let mid = m
            .vertices
            .iter()
            .filter(|v| v.x.abs() < 1e-12)
            .map(|v| v.z)
            .collect::<Vec<_>>();
        assert_eq!(mid.len(), 2);
        assert!(mid.iter().all(|z| (z - 1.5).abs() < 1e-12));
        let ends = m
            .vertices
            .iter()
            .filter(|v| (v.x.abs() - 20.0).abs() < 1e-12);
        assert!(ends.into_iter().all(|v| v.z.abs() < 1e-12));
    }

    #[test]
    fn arc_length_monotone() {
        let mut prev = bow_arc_length(20.0, 0.0);
        assert_eq!(prev, 40.0);
        for k in 1..40 {
            let l = bow_arc_length(20.0, k as f64 * 0.5);
            assert!(l > prev);
            prev = l;
        }
        // Semicircle.
        assert!((bow_arc_length(20.0, 20.0) - 20.0 * std::f64::consts::PI).abs() < 1e-9);
    }
}
