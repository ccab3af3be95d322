//! Parametric gel-pad generation.
//!
//! Pad frame: x across the width W, y along the length L (centred on 0),
//! sensing face apex at the origin with outward normal +z. The gel body lies
//! below the face and is extruded inward by the thickness t.

use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::math::{vec3, Vec3};
use crate::meshconvert::{hex_to_surface, HexMesh, HexSurface, Strictness, TriMesh};

/// Target surface element edge length (mm).
pub const DEFAULT_ELEMENT_SIZE: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PadFamily {
    Flat,
    /// Cylinder axis along y.
    Cylindrical {
        radius: f64,
    },
    /// Semi-axes along x, y and z; z must be the shortest.
    Ellipsoid {
        radii: [f64; 3],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GelPadSpec {
    #[serde(flatten)]
    pub family: PadFamily,
    pub width: f64,
    pub length: f64,
    pub thickness: f64,
    /// Surface cells across the width and along the length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<[usize; 2]>,
    /// Element layers through the thickness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadSize {
    Baby,
    Standard,
    Wide,
}

impl PadSize {
    /// (width, length) in mm.
    pub fn dims(self) -> (f64, f64) {
        match self {
            PadSize::Baby => (18.0, 48.0),
            PadSize::Standard => (35.0, 70.0),
            PadSize::Wide => (60.0, 50.0),
        }
    }
}

impl std::str::FromStr for PadSize {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baby" => Ok(PadSize::Baby),
            "standard" | "35x70" => Ok(PadSize::Standard),
            "wide" | "60x50" => Ok(PadSize::Wide),
            _ => Err(GeometryError::InvalidSpec(format!(
                "unknown pad size `{s}`"
            ))),
        }
    }
}

impl GelPadSpec {
    pub fn flat(width: f64, length: f64, thickness: f64) -> Self {
        Self {
            family: PadFamily::Flat,
            width,
            length,
            thickness,
            resolution: None,
            layers: None,
        }
    }

    pub fn cylindrical(width: f64, length: f64, thickness: f64, radius: f64) -> Self {
        Self {
            family: PadFamily::Cylindrical { radius },
            ..Self::flat(width, length, thickness)
        }
    }

    pub fn ellipsoid(width: f64, length: f64, thickness: f64, radii: [f64; 3]) -> Self {
        Self {
            family: PadFamily::Ellipsoid { radii },
            ..Self::flat(width, length, thickness)
        }
    }

    /// Default thickness for a pad of the given width.
    pub fn default_thickness(width: f64) -> f64 {
        width / 6.0
    }

    /// Preset shapes for a pad size. `variant` picks one of three radii sets
    /// (0 is the flattest).
    pub fn preset(size: PadSize, family: &str, variant: usize) -> Result<Self, GeometryError> {
        let (w, l) = size.dims();
        let t = Self::default_thickness(w);
        let v = variant.min(2);
        Ok(match family {
            "flat" => Self::flat(w, l, t),
            "cylindrical" | "cylinder" => Self::cylindrical(w, l, t, w * [1.5, 0.9, 0.6][v]),
            "ellipsoid" => {
                let k = [1.8, 1.2, 0.75][v];
                let (a, b) = (k * w, k * l);
                Self::ellipsoid(w, l, t, [a, b, [0.5, 0.6, 0.7][v] * a.min(b)])
            }
            _ => {
                return Err(GeometryError::InvalidSpec(format!(
                    "unknown pad family `{family}`"
                )))
            }
        })
    }

    pub fn with_resolution(mut self, nu: usize, nv: usize) -> Self {
        self.resolution = Some([nu, nv]);
        self
    }

    pub fn with_layers(mut self, n: usize) -> Self {
        self.layers = Some(n);
        self
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            PadFamily::Flat => "flat",
            PadFamily::Cylindrical { .. } => "cylindrical",
            PadFamily::Ellipsoid { .. } => "ellipsoid",
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let pos = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(GeometryError::InvalidSpec(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        pos(self.width, "width")?;
        pos(self.length, "length")?;
        pos(self.thickness, "thickness")?;
        if let Some([nu, nv]) = self.resolution {
            if nu < 1 || nv < 1 {
                return Err(GeometryError::InvalidSpec(
                    "resolution must be at least 1×1".into(),
                ));
            }
        }
        if self.layers == Some(0) {
            return Err(GeometryError::InvalidSpec(
                "layers must be at least 1".into(),
            ));
        }
        match self.family {
            PadFamily::Flat => {}
            PadFamily::Cylindrical { radius } => {
                pos(radius, "cylinder radius")?;
                if radius < self.width / 2.0 {
                    return Err(GeometryError::PatchDoesNotFit(format!(
                        "width {} exceeds the cylinder diameter {}",
                        self.width,
                        2.0 * radius
                    )));
                }
                if self.thickness >= radius {
                    return Err(GeometryError::InvalidSpec(
                        "thickness must be below the cylinder radius".into(),
                    ));
                }
            }
            PadFamily::Ellipsoid { radii: [a, b, c] } => {
                pos(a, "ellipsoid radius a")?;
                pos(b, "ellipsoid radius b")?;
                pos(c, "ellipsoid radius c")?;
                if c > a || c > b {
                    return Err(GeometryError::InvalidSpec(
                        "ellipsoid z radius must be the shortest axis".into(),
                    ));
                }
                let s = (self.width / (2.0 * a)).powi(2) + (self.length / (2.0 * b)).powi(2);
                if s >= 1.0 {
                    return Err(GeometryError::PatchDoesNotFit(format!(
                        "{}×{} patch corners fall outside the ellipsoid",
                        self.width, self.length
                    )));
                }
                // Folding inside the patch is caught by the element Jacobians.
                if self.thickness >= c {
                    return Err(GeometryError::InvalidSpec(
                        "thickness must be below the z radius".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> (usize, usize, usize) {
        let n = |len: f64| ((len / DEFAULT_ELEMENT_SIZE).ceil() as usize).max(2);
        let [nu, nv] = self.resolution.unwrap_or([n(self.width), n(self.length)]);
        let nt = self
            .layers
            .unwrap_or(((self.thickness / DEFAULT_ELEMENT_SIZE).ceil() as usize).max(1));
        (nu, nv, nt)
    }

    /// Point and outward unit normal of the sensing face at parameters
    /// `(u, v)` in `[0, 1]²`.
    pub fn surface_point(&self, u: f64, v: f64) -> (Vec3, Vec3) {
        let y = (v - 0.5) * self.length;
        match self.family {
            PadFamily::Flat => (vec3((u - 0.5) * self.width, y, 0.0), Vec3::z()),
            PadFamily::Cylindrical { radius } => {
                let phi_max = (self.width / (2.0 * radius)).clamp(-1.0, 1.0).asin();
                let phi = (2.0 * u - 1.0) * phi_max;
                let (s, c) = phi.sin_cos();
                (vec3(radius * s, y, radius * (c - 1.0)), vec3(s, 0.0, c))
            }
            PadFamily::Ellipsoid { radii: [a, b, c] } => {
                let x = (u - 0.5) * self.width;
                let q = 1.0 - (x / a).powi(2) - (y / b).powi(2);
                let zc = c * q.max(0.0).sqrt();
                let p = vec3(x, y, zc - c);
                let n = vec3(x / (a * a), y / (b * b), zc / (c * c)).normalize();
                (p, n)
            }
        }
    }

    /// Sensing-face height profile across the width at the pad centre line.
    pub fn cross_section(&self, samples: usize) -> Vec<(f64, f64)> {
        let n = samples.max(2);
        (0..n)
            .map(|i| {
                let (p, _) = self.surface_point(i as f64 / (n - 1) as f64, 0.5);
                (p.x, p.z)
            })
            .collect()
    }
}

/// Generated pad: volume mesh, closed boundary and the sensing face.
#[derive(Debug, Clone)]
pub struct GelPad {
    pub spec: GelPadSpec,
    pub hex: HexMesh,
    pub surface: HexSurface,
    pub sensing_face: TriMesh,
    /// Hex node index of each sensing-face vertex.
    pub sensing_nodes: Vec<usize>,
    /// Grid dimensions (cells across, along, through).
    pub cells: (usize, usize, usize),
}

impl GelPad {
    pub fn node_index(&self, i: usize, j: usize, m: usize) -> usize {
        let (nu, nv, _) = self.cells;
        (m * (nv + 1) + j) * (nu + 1) + i
    }

    /// Nodes of the side wall at `i = 0` (`plus_x = false`) or `i = nu`.
    pub fn side_wall_nodes(&self, plus_x: bool) -> Vec<Vec3> {
        let (nu, nv, nt) = self.cells;
        let i = if plus_x { nu } else { 0 };
        let mut out = Vec::with_capacity((nv + 1) * (nt + 1));
        for m in 0..=nt {
            for j in 0..=nv {
                out.push(self.hex.nodes[self.node_index(i, j, m)]);
            }
        }
        out
    }
}

pub fn generate_gelpad(spec: &GelPadSpec) -> Result<GelPad, GeometryError> {
    spec.validate()?;
    let (nu, nv, nt) = spec.cells();
    let mut nodes = Vec::with_capacity((nu + 1) * (nv + 1) * (nt + 1));
    let mut face = Vec::with_capacity((nu + 1) * (nv + 1));
    for j in 0..=nv {
        for i in 0..=nu {
            face.push(spec.surface_point(i as f64 / nu as f64, j as f64 / nv as f64));
        }
    }
    for m in 0..=nt {
        let depth = spec.thickness * (nt - m) as f64 / nt as f64;
        for &(p, n) in &face {
            nodes.push(if m == nt { p } else { p - n * depth });
        }
    }
    let idx = |i: usize, j: usize, m: usize| (m * (nv + 1) + j) * (nu + 1) + i;
    let mut elements = Vec::with_capacity(nu * nv * nt);
    for m in 0..nt {
        for j in 0..nv {
            for i in 0..nu {
                elements.push([
                    idx(i, j, m),
                    idx(i + 1, j, m),
                    idx(i + 1, j + 1, m),
                    idx(i, j + 1, m),
                    idx(i, j, m + 1),
                    idx(i + 1, j, m + 1),
                    idx(i + 1, j + 1, m + 1),
                    idx(i, j + 1, m + 1),
                ]);
            }
        }
    }
    let mut hex = HexMesh::new(nodes, elements)
        .map_err(|e| GeometryError::InvalidSpec(format!("pad volume: {e}")))?;
    hex.sensing_nodes = Some(
        (0..(nu + 1) * (nv + 1))
            .map(|k| nt * (nu + 1) * (nv + 1) + k)
            .collect(),
    );
    let (surface, _) = hex_to_surface(&hex, Strictness::Strict)?;
    let tris = crate::meshconvert::sensing_triangles(&surface, &hex);
    let (sensing_face, local) = surface.mesh.submesh(&tris);
    let sensing_nodes = local.iter().map(|&v| surface.node_of_vertex[v]).collect();
    Ok(GelPad {
        spec: *spec,
        hex,
        surface,
        sensing_face,
        sensing_nodes,
        cells: (nu, nv, nt),
    })
}
