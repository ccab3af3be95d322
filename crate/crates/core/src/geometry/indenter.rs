//! Rigid indenters with exact signed distance (negative inside).

use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::math::{vec3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Indenter {
    /// Finite cylinder with flat caps.
    Cylinder {
        center: Vec3,
        axis: Vec3,
        radius: f64,
        half_length: f64,
    },
    /// Box rotated by `yaw_deg` about z.
    Cuboid {
        center: Vec3,
        half_extents: Vec3,
        #[serde(default)]
        yaw_deg: f64,
    },
    Sphere {
        center: Vec3,
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndenterKind {
    Cylinder,
    Cuboid,
    Sphere,
}

impl std::str::FromStr for IndenterKind {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cylinder" => Ok(Self::Cylinder),
            "cuboid" | "box" => Ok(Self::Cuboid),
            "sphere" => Ok(Self::Sphere),
            _ => Err(GeometryError::InvalidSpec(format!(
                "unknown indenter kind `{s}`"
            ))),
        }
    }
}

/// Builds an indenter. `dims` are `[radius, length]` for a cylinder (axis
/// along `axis`), `[sx, sy, sz]` full sizes for a cuboid and `[radius]` for a
/// sphere.
pub fn make_indenter(
    kind: IndenterKind,
    dims: &[f64],
    center: Vec3,
    axis: Vec3,
) -> Result<Indenter, GeometryError> {
    let need = |n: usize| -> Result<(), GeometryError> {
        if dims.len() != n || dims.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            Err(GeometryError::InvalidSpec(format!(
                "{kind:?} needs {n} positive dimensions"
            )))
        } else {
            Ok(())
        }
    };
    let ind = match kind {
        IndenterKind::Cylinder => {
            need(2)?;
            Indenter::Cylinder {
                center,
                axis: axis
                    .try_normalize(1e-12)
                    .ok_or_else(|| GeometryError::InvalidSpec("cylinder axis is zero".into()))?,
                radius: dims[0],
                half_length: dims[1] / 2.0,
            }
        }
        IndenterKind::Cuboid => {
            need(3)?;
            Indenter::Cuboid {
                center,
                half_extents: vec3(dims[0], dims[1], dims[2]) / 2.0,
                yaw_deg: 0.0,
            }
        }
        IndenterKind::Sphere => {
            need(1)?;
            Indenter::Sphere {
                center,
                radius: dims[0],
            }
        }
    };
    ind.validate()?;
    Ok(ind)
}

fn box_sdf(q: Vec3, h: Vec3) -> (f64, Vec3) {
    let d = q.abs() - h;
    let outside = d.sup(&Vec3::zeros());
    let on = outside.norm();
    if on > 0.0 {
        let g = outside.component_mul(&q.map(|c| if c < 0.0 { -1.0 } else { 1.0 }));
        (on, g / on)
    } else {
        let k = d.imax();
        let mut g = Vec3::zeros();
        g[k] = if q[k] < 0.0 { -1.0 } else { 1.0 };
        (d[k], g)
    }
}

impl Indenter {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let ok = match *self {
            Indenter::Cylinder {
                axis,
                radius,
                half_length,
                ..
            } => radius > 0.0 && half_length > 0.0 && (axis.norm() - 1.0).abs() < 1e-9,
            Indenter::Cuboid { half_extents, .. } => half_extents.iter().all(|&h| h > 0.0),
            Indenter::Sphere { radius, .. } => radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::InvalidSpec(format!(
                "invalid indenter {self:?}"
            )))
        }
    }

    pub fn center(&self) -> Vec3 {
        match *self {
            Indenter::Cylinder { center, .. }
            | Indenter::Cuboid { center, .. }
            | Indenter::Sphere { center, .. } => center,
        }
    }

    pub fn translated(&self, by: Vec3) -> Indenter {
        let mut out = *self;
        match &mut out {
            Indenter::Cylinder { center, .. }
            | Indenter::Cuboid { center, .. }
            | Indenter::Sphere { center, .. } => *center += by,
        }
        out
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.distance_and_normal(p).0
    }

    /// Outward unit normal (SDF gradient) at `p`.
    pub fn normal(&self, p: &Vec3) -> Vec3 {
        self.distance_and_normal(p).1
    }

    pub fn distance_and_normal(&self, p: &Vec3) -> (f64, Vec3) {
        match *self {
            Indenter::Sphere { center, radius } => {
                let d = p - center;
                let r = d.norm();
                let n = if r > 0.0 { d / r } else { Vec3::z() };
                (r - radius, n)
            }
            Indenter::Cuboid {
                center,
                half_extents,
                yaw_deg,
            } => {
                let (s, c) = yaw_deg.to_radians().sin_cos();
                let d = p - center;
                let q = vec3(c * d.x + s * d.y, -s * d.x + c * d.y, d.z);
                let (dist, g) = box_sdf(q, half_extents);
                (dist, vec3(c * g.x - s * g.y, s * g.x + c * g.y, g.z))
            }
            Indenter::Cylinder {
                center,
                axis,
                radius,
                half_length,
            } => {
                let d = p - center;
                let a = d.dot(&axis);
                let radial = d - axis * a;
                let rho = radial.norm();
                let er = if rho > 0.0 {
                    radial / rho
                } else {
                    crate::math::orthonormal_basis(&axis).0
                };
                let ea = if a < 0.0 { -axis } else { axis };
                let dr = rho - radius;
                let da = a.abs() - half_length;
                if dr > 0.0 && da > 0.0 {
                    let n = (dr * er + da * ea) / dr.hypot(da);
                    (dr.hypot(da), n)
                } else if dr > da {
                    (dr, er)
                } else {
                    (da, ea)
                }
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        match *self {
            Indenter::Sphere { center, radius } => {
                (center.add_scalar(-radius), center.add_scalar(radius))
            }
            Indenter::Cuboid {
                center,
                half_extents,
                ..
            } => {
                let r = half_extents.xy().norm();
                let e = vec3(r, r, half_extents.z);
                (center - e, center + e)
            }
            Indenter::Cylinder {
                center,
                axis,
                radius,
                half_length,
            } => {
                let e =
                    axis.map(|c| (c * half_length).abs() + radius * (1.0 - c * c).max(0.0).sqrt());
                (center - e, center + e)
            }
        }
    }
}
