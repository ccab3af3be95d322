use super::bvh::Ray;
use crate::geometry::Camera;
use crate::math::Vec3;

/// Pinhole camera with precomputed basis. Row 0 is the top of the image.
#[derive(Debug, Clone, Copy)]
pub struct PinholeCamera {
    pub position: Vec3,
    forward: Vec3,
    right: Vec3,
    up: Vec3,
    tan_half_x: f64,
    tan_half_y: f64,
    width: u32,
    height: u32,
}

impl PinholeCamera {
    pub fn new(cam: &Camera, width: u32, height: u32) -> PinholeCamera {
        let forward = (cam.look_at - cam.position).normalize();
        let right = forward.cross(&cam.up).normalize();
        let up = right.cross(&forward);
        let tan_half_x = (cam.hfov_deg.to_radians() / 2.0).tan();
        PinholeCamera {
            position: cam.position,
            forward,
            right,
            up,
            tan_half_x,
            tan_half_y: tan_half_x * height as f64 / width as f64,
            width,
            height,
        }
    }

    /// Ray through image position `(x, y)` in pixel units.
    pub fn ray(&self, x: f64, y: f64) -> Ray {
        let sx = (2.0 * x / self.width as f64 - 1.0) * self.tan_half_x;
        let sy = (1.0 - 2.0 * y / self.height as f64) * self.tan_half_y;
        Ray {
            origin: self.position,
            dir: (self.forward + self.right * sx + self.up * sy).normalize(),
        }
    }

    /// Pixel coordinates of a world point, if in front of the camera.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64)> {
        let d = p - self.position;
        let z = d.dot(&self.forward);
        if z <= 0.0 {
            return None;
        }
        let sx = d.dot(&self.right) / z / self.tan_half_x;
        let sy = d.dot(&self.up) / z / self.tan_half_y;
        Some((
            (sx + 1.0) * 0.5 * self.width as f64,
            (1.0 - sy) * 0.5 * self.height as f64,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::vec3;

    #[test]
    fn ray_project_round_trip() {
        let cam = Camera {
            position: vec3(1.0, -2.0, 3.0),
            look_at: vec3(0.0, 5.0, 0.0),
            up: Vec3::z(),
            hfov_deg: 90.0,
        };
        let pc = PinholeCamera::new(&cam, 64, 48);
        for (x, y) in [(0.5, 0.5), (32.0, 24.0), (63.2, 10.7)] {
            let r = pc.ray(x, y);
            let (px, py) = pc.project(&r.at(7.0)).unwrap();
            assert!((px - x).abs() < 1e-9 && (py - y).abs() < 1e-9);
        }
        // Centre ray looks at the target; top row looks up.
        assert!((pc.ray(32.0, 24.0).dir - (cam.look_at - cam.position).normalize()).norm() < 1e-12);
        assert!(pc.ray(32.0, 0.0).dir.z > pc.ray(32.0, 48.0).dir.z);
    }
}
