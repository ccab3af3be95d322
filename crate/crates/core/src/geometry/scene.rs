//! Sensor scene description and automatic finger layout.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::indenter::Indenter;
use super::pad::{GelPadSpec, PadFamily};
use super::GeometryError;
use crate::deform::DeformSettings;
use crate::math::{vec3, Vec3};
use crate::meshconvert::TriMesh;
use crate::render::RenderSettings;
use crate::spectra::{blue_led_spectrum, PaintPreset, SampledSpectrum};

pub const SCHEMA_VERSION: u32 = 1;

pub const GEL_MATERIAL: &str = "gel_coating";
pub const MIRROR_MATERIAL: &str = "mirror";
pub const RED_PAINT_MATERIAL: &str = "paint_red";
pub const GREEN_PAINT_MATERIAL: &str = "paint_green";

/// Pinhole camera. The image size lives in the render settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub position: Vec3,
    pub look_at: Vec3,
    #[serde(default = "default_up")]
    pub up: Vec3,
    #[serde(default = "default_hfov")]
    pub hfov_deg: f64,
}

fn default_up() -> Vec3 {
    Vec3::z()
}
fn default_hfov() -> f64 {
    120.0
}

/// Oriented rectangle: `center ± u·half_extents[0] ± v·half_extents[1]` with
/// `v = normal × u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub center: Vec3,
    pub normal: Vec3,
    pub u_axis: Vec3,
    pub half_extents: [f64; 2],
}

impl Rect {
    pub fn v_axis(&self) -> Vec3 {
        self.normal.cross(&self.u_axis)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let unit = |v: &Vec3| (v.norm() - 1.0).abs() < 1e-9;
        if !unit(&self.normal) || !unit(&self.u_axis) || self.normal.dot(&self.u_axis).abs() > 1e-9
        {
            return Err(GeometryError::InvalidScene(
                "rectangle axes must be orthonormal".into(),
            ));
        }
        if !(self.half_extents[0] > 0.0 && self.half_extents[1] > 0.0) {
            return Err(GeometryError::InvalidScene(
                "rectangle half extents must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn point(&self, s: f64, t: f64) -> Vec3 {
        self.center
            + self.u_axis * (s * self.half_extents[0])
            + self.v_axis() * (t * self.half_extents[1])
    }

    /// Two triangles wound so the face normal equals `normal`.
    pub fn to_trimesh(&self) -> TriMesh {
        TriMesh {
            vertices: vec![
                self.point(-1.0, -1.0),
                self.point(1.0, -1.0),
                self.point(1.0, 1.0),
                self.point(-1.0, 1.0),
            ],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
        }
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_extents[0] * self.half_extents[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorSpec {
    pub rect: Rect,
    pub material: String,
    /// Sagitta of the circular bow along the rectangle's u axis (mm).
    #[serde(default)]
    pub deflection: f64,
    #[serde(default = "default_mirror_segments")]
    pub segments: usize,
}

fn default_mirror_segments() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GelSource {
    /// Generated from the pad spec (and deformed by the approximate deformer
    /// when an indenter is present).
    #[default]
    Generated,
    /// Hex mesh in the neutral format; displacements, if any, are applied.
    NeutralMesh { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GelSpec {
    pub pad: GelPadSpec,
    #[serde(default)]
    pub source: GelSource,
    pub material: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripSide {
    PlusX,
    MinusX,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaintStrip {
    pub side: StripSide,
    /// Emitting face points into the pad.
    pub rect: Rect,
    pub material: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LedPlacement {
    Bottom,
    Top,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedPanel {
    pub center: Vec3,
    pub normal: Vec3,
    /// Half sizes across the pad width (x) and along the panel's other axis.
    pub half_extents: [f64; 2],
    pub emission: SampledSpectrum,
    pub radiant_scale: f64,
    pub tilt_angle: f64,
    pub placement: LedPlacement,
}

impl LedPanel {
    /// Panel facing the pad plane at `tilt_angle` = 0 and turned toward the
    /// opposite end of the finger as the angle grows.
    pub fn tilted(
        placement: LedPlacement,
        center: Vec3,
        tilt_angle: f64,
        half_extents: [f64; 2],
        radiant_scale: f64,
    ) -> LedPanel {
        let mut p = LedPanel {
            center,
            normal: Vec3::z(),
            half_extents,
            emission: blue_led_spectrum(),
            radiant_scale,
            tilt_angle,
            placement,
        };
        p.set_tilt(tilt_angle);
        p
    }

    pub fn tilt_normal(placement: LedPlacement, tilt_angle: f64) -> Vec3 {
        let (s, c) = tilt_angle.to_radians().sin_cos();
        match placement {
            LedPlacement::Bottom => vec3(0.0, s, c),
            LedPlacement::Top => vec3(0.0, -s, c),
        }
    }

    pub fn set_tilt(&mut self, tilt_angle: f64) {
        self.tilt_angle = tilt_angle;
        self.normal = Self::tilt_normal(self.placement, tilt_angle);
    }

    pub fn rect(&self) -> Rect {
        // u across the pad; for a normal along x fall back to y.
        let u = if self.normal.x.abs() > 0.9 {
            Vec3::y()
        } else {
            (Vec3::x() - self.normal * self.normal.x).normalize()
        };
        Rect {
            center: self.center,
            normal: self.normal,
            u_axis: u,
            half_extents: self.half_extents,
        }
    }

    /// Characteristic size used by the fluorescence falloff.
    pub fn characteristic_size(&self) -> f64 {
        0.5 * (self.half_extents[0] + self.half_extents[1])
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if (self.normal.norm() - 1.0).abs() > 1e-9 {
            return Err(GeometryError::InvalidScene(
                "LED normal must be unit length".into(),
            ));
        }
        if !(self.half_extents[0] > 0.0 && self.half_extents[1] > 0.0) {
            return Err(GeometryError::InvalidScene(
                "LED half extents must be positive".into(),
            ));
        }
        if !(0.0..180.0).contains(&self.tilt_angle) {
            return Err(GeometryError::InvalidScene(format!(
                "LED tilt {} outside [0, 180)",
                self.tilt_angle
            )));
        }
        if !(self.radiant_scale >= 0.0 && self.radiant_scale.is_finite()) {
            return Err(GeometryError::InvalidScene(
                "LED radiant_scale must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndenterPlacement {
    pub shape: Indenter,
    /// Maximum penetration after the prescribed displacement (mm).
    pub depth: f64,
    #[serde(default = "default_approach")]
    pub approach: Vec3,
    #[serde(default)]
    pub settings: DeformSettings,
}

fn default_approach() -> Vec3 {
    -Vec3::z()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaterialSpec {
    Lambertian {
        albedo: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        emission: Option<[f64; 3]>,
    },
    Mirror {
        reflectance: f64,
    },
    CoatedFlake {
        albedo: [f64; 3],
        specular_fraction: f64,
        roughness: f64,
    },
    Fluorescent {
        preset: PaintPreset,
        conversion_efficiency: f64,
    },
}

impl MaterialSpec {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let ok = match *self {
            MaterialSpec::Lambertian { albedo, emission } => {
                albedo.iter().all(|&a| unit(a))
                    && emission.is_none_or(|e| e.iter().all(|&x| x >= 0.0 && x.is_finite()))
            }
            MaterialSpec::Mirror { reflectance } => unit(reflectance),
            MaterialSpec::CoatedFlake {
                albedo,
                specular_fraction,
                roughness,
            } => {
                unit(specular_fraction)
                    && unit(roughness)
                    && albedo
                        .iter()
                        .all(|&a| unit(a) && a + specular_fraction <= 1.0 + 1e-12)
            }
            MaterialSpec::Fluorescent {
                conversion_efficiency,
                ..
            } => unit(conversion_efficiency),
        };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::InvalidScene(format!(
                "material {self:?} violates its bounds"
            )))
        }
    }
}

/// Default materials: coated flake gel surface, 0.9 mirror and both paints.
pub fn default_materials() -> BTreeMap<String, MaterialSpec> {
    let mut m = BTreeMap::new();
    m.insert(
        GEL_MATERIAL.to_string(),
        MaterialSpec::CoatedFlake {
            albedo: [0.6; 3],
            specular_fraction: 0.1,
            roughness: 0.3,
        },
    );
    m.insert(
        MIRROR_MATERIAL.to_string(),
        MaterialSpec::Mirror { reflectance: 0.9 },
    );
    for (id, preset) in [
        (RED_PAINT_MATERIAL, PaintPreset::Red),
        (GREEN_PAINT_MATERIAL, PaintPreset::Green),
    ] {
        m.insert(
            id.to_string(),
            MaterialSpec::Fluorescent {
                preset,
                conversion_efficiency: crate::spectra::DEFAULT_CONVERSION_EFFICIENCY,
            },
        );
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectShape {
    Rect(Rect),
    /// Axis-aligned box; `inward` flips the faces to point inside.
    Box {
        center: Vec3,
        half_extents: Vec3,
        #[serde(default)]
        inward: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub shape: ObjectShape,
    pub material: String,
}

impl ObjectShape {
    pub fn to_trimesh(&self) -> TriMesh {
        match self {
            ObjectShape::Rect(r) => r.to_trimesh(),
            ObjectShape::Box {
                center,
                half_extents,
                inward,
            } => {
                let mut vertices = Vec::with_capacity(8);
                for k in 0..8 {
                    let s = |bit: usize| if k >> bit & 1 == 1 { 1.0 } else { -1.0 };
                    vertices.push(center + half_extents.component_mul(&vec3(s(0), s(1), s(2))));
                }
                // Outward quads over the corner numbering (bit0 = x, bit1 = y, bit2 = z).
                let quads = [
                    [0, 2, 3, 1],
                    [4, 5, 7, 6],
                    [0, 1, 5, 4],
                    [2, 6, 7, 3],
                    [0, 4, 6, 2],
                    [1, 3, 7, 5],
                ];
                let mut triangles = Vec::with_capacity(12);
                for [a, b, c, d] in quads {
                    if *inward {
                        triangles.push([a, c, b]);
                        triangles.push([a, d, c]);
                    } else {
                        triangles.push([a, b, c]);
                        triangles.push([a, c, d]);
                    }
                }
                TriMesh {
                    vertices,
                    triangles,
                }
            }
        }
    }
}

/// Pad point whose image pixel is probed, with the averaging window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub target: Vec3,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_window() -> usize {
    9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub schema_version: u32,
    pub camera: Camera,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror: Option<MirrorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gel: Option<GelSpec>,
    #[serde(default)]
    pub paint_strips: Vec<PaintStrip>,
    #[serde(default)]
    pub led_panels: Vec<LedPanel>,
    #[serde(default)]
    pub objects: Vec<SceneObject>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indenter: Option<IndenterPlacement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    pub materials: BTreeMap<String, MaterialSpec>,
    #[serde(default)]
    pub render: RenderSettings,
}

impl Scene {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(GeometryError::InvalidScene(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let c = &self.camera;
        if !(c.hfov_deg > 10.0 && c.hfov_deg <= 170.0) {
            return Err(GeometryError::InvalidScene(format!(
                "camera hfov {} outside (10, 170]",
                c.hfov_deg
            )));
        }
        let fwd = c.look_at - c.position;
        if fwd.norm() < 1e-12
            || fwd.cross(&c.up).norm() < 1e-12 * fwd.norm() * c.up.norm().max(1e-300)
        {
            return Err(GeometryError::InvalidScene(
                "camera look direction and up are degenerate".into(),
            ));
        }
        self.render
            .validate()
            .map_err(|e| GeometryError::InvalidScene(e.to_string()))?;
        for m in self.materials.values() {
            m.validate()?;
        }
        let need = |id: &str, what: &str| -> Result<&MaterialSpec, GeometryError> {
            self.materials.get(id).ok_or_else(|| {
                GeometryError::InconsistentMaterials(format!(
                    "{what} references unknown material `{id}`"
                ))
            })
        };
        if let Some(m) = &self.mirror {
            m.rect.validate()?;
            need(&m.material, "mirror")?;
            if !(m.deflection >= 0.0) || m.segments < 1 {
                return Err(GeometryError::InvalidScene(
                    "mirror deflection/segments invalid".into(),
                ));
            }
        }
        if let Some(g) = &self.gel {
            g.pad.validate()?;
            if matches!(need(&g.material, "gel")?, MaterialSpec::Fluorescent { .. }) {
                return Err(GeometryError::InconsistentMaterials(
                    "gel surface cannot be fluorescent".into(),
                ));
            }
        }
        for s in &self.paint_strips {
            s.rect.validate()?;
            if !matches!(
                need(&s.material, "paint strip")?,
                MaterialSpec::Fluorescent { .. }
            ) {
                return Err(GeometryError::InconsistentMaterials(format!(
                    "paint strip material `{}` is not fluorescent",
                    s.material
                )));
            }
        }
        for o in &self.objects {
            if let ObjectShape::Rect(r) = &o.shape {
                r.validate()?;
            }
            if matches!(
                need(&o.material, "object")?,
                MaterialSpec::Fluorescent { .. }
            ) {
                return Err(GeometryError::InconsistentMaterials(
                    "fluorescent materials are only valid on paint strips".into(),
                ));
            }
        }
        for p in &self.led_panels {
            p.validate()?;
            if p.emission.grid() != &crate::spectra::SpectralGrid::DEFAULT {
                return Err(GeometryError::InvalidScene(
                    "LED emission must use the default spectral grid".into(),
                ));
            }
        }
        if let Some(ind) = &self.indenter {
            ind.shape.validate()?;
            ind.settings
                .validate()
                .map_err(|e| GeometryError::InvalidScene(e.to_string()))?;
            if !(ind.depth >= 0.0) || (ind.approach.norm() - 1.0).abs() > 1e-9 {
                return Err(GeometryError::InvalidScene(
                    "indenter depth/approach invalid".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String, GeometryError> {
        toml::to_string_pretty(self).map_err(|e| GeometryError::Format(e.to_string()))
    }

    pub fn from_toml(s: &str) -> Result<Scene, GeometryError> {
        let scene: Scene = toml::from_str(s).map_err(|e| GeometryError::Format(e.to_string()))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &std::path::Path) -> Result<Scene, GeometryError> {
        let text = std::fs::read_to_string(path)?;
        let mut scene = Self::from_toml(&text)?;
        // Relative mesh paths are resolved against the scene file.
        if let Some(GelSpec {
            source: GelSource::NeutralMesh { path: p },
            ..
        }) = &mut scene.gel
        {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(scene)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), GeometryError> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn panels(&self, placement: LedPlacement) -> impl Iterator<Item = &LedPanel> {
        self.led_panels
            .iter()
            .filter(move |p| p.placement == placement)
    }

    /// Sets the tilt of every bottom panel.
    pub fn set_bottom_tilt(&mut self, tilt: f64) {
        for p in self
            .led_panels
            .iter_mut()
            .filter(|p| p.placement == LedPlacement::Bottom)
        {
            p.set_tilt(tilt);
        }
    }
}

/// Derived placement of the finger's internal parts around a pad.
///
/// The finger is a triangle in the y-z plane: the front fin carries the pad
/// (z = 0), the back fin runs from the base at depth `depth` to the tip, and
/// the mirror lies along the back fin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerLayout {
    pub y_base: f64,
    pub y_tip: f64,
    pub depth: f64,
    /// Lowest point of the gel body.
    pub pad_low: f64,
    pub fin_start: Vec3,
    pub fin_end: Vec3,
    pub camera: Vec3,
    pub bottom_led: Vec3,
    pub top_led: Vec3,
    pub led_half_extents: [f64; 2],
    pub indenter_y: f64,
}

impl FingerLayout {
    pub fn for_pad(pad: &GelPadSpec) -> FingerLayout {
        let (w, l) = (pad.width, pad.length);
        let mut face_low: f64 = 0.0;
        for i in 0..=8 {
            for j in 0..=8 {
                face_low = face_low.min(pad.surface_point(i as f64 / 8.0, j as f64 / 8.0).0.z);
            }
        }
        let pad_low = face_low - pad.thickness;
        let margin = 5.0;
        let y_base = -l / 2.0 - margin;
        // Room past the pad end keeps the tip light off the gel.
        let y_tip = 0.8 * l;
        let depth = 0.75 * l.max(w) - pad_low.min(0.0) * 0.5;
        let fin_start = vec3(0.0, y_base, -depth);
        let fin_end = vec3(0.0, y_tip, pad_low - 1.0);
        FingerLayout {
            y_base,
            y_tip,
            depth,
            pad_low,
            fin_start,
            fin_end,
            camera: vec3(0.0, y_base + 4.0, -0.5 * depth),
            bottom_led: vec3(0.0, y_base + 6.0, -depth + 9.0),
            top_led: vec3(0.0, y_tip - 2.0, pad_low - 2.5),
            led_half_extents: [0.4 * w, 4.0],
            indenter_y: -0.15 * l,
        }
    }

    fn fin_point(&self, f: f64) -> Vec3 {
        self.fin_start + (self.fin_end - self.fin_start) * f
    }

    /// Mirror rectangle on the back fin, facing into the finger.
    pub fn mirror_rect(&self, pad: &GelPadSpec) -> Rect {
        let (f0, f1) = (0.2, 0.86);
        let dir = (self.fin_end - self.fin_start).normalize();
        let normal = vec3(0.0, -dir.z, dir.y);
        let len = (self.fin_end - self.fin_start).norm() * (f1 - f0);
        Rect {
            center: self.fin_point(0.5 * (f0 + f1)),
            normal,
            u_axis: dir,
            half_extents: [len / 2.0, pad.width / 2.0 + 3.0],
        }
    }

    /// Camera aimed at the mirror image of the pad centre.
    pub fn camera(&self, mirror: &Rect) -> Camera {
        let p = Vec3::zeros();
        let image = p - mirror.normal * (2.0 * (p - mirror.center).dot(&mirror.normal));
        Camera {
            position: self.camera,
            look_at: image,
            up: Vec3::z(),
            hfov_deg: 120.0,
        }
    }

    pub fn bottom_panel(&self, tilt: f64, radiant_scale: f64) -> LedPanel {
        LedPanel::tilted(
            LedPlacement::Bottom,
            self.bottom_led,
            tilt,
            self.led_half_extents,
            radiant_scale,
        )
    }

    pub fn top_panel(&self, tilt: f64, radiant_scale: f64) -> LedPanel {
        LedPanel::tilted(
            LedPlacement::Top,
            self.top_led,
            tilt,
            self.led_half_extents,
            radiant_scale,
        )
    }
}

/// Fits a rectangle to the side wall of a generated pad; the normal points
/// into the pad.
pub fn side_wall_rect(pad: &super::pad::GelPad, plus_x: bool) -> Rect {
    let pts = pad.side_wall_nodes(plus_x);
    let n = pts.len() as f64;
    let c = pts.iter().sum::<Vec3>() / n;
    let mut cov = nalgebra::Matrix3::<f64>::zeros();
    for p in &pts {
        let d = p - c;
        cov += d * d.transpose();
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    let k = eig.eigenvalues.imin();
    let mut normal: Vec3 = eig.eigenvectors.column(k).into_owned().normalize();
    if normal.x * if plus_x { 1.0 } else { -1.0 } > 0.0 {
        normal = -normal;
    }
    let u = (Vec3::y() - normal * normal.y).normalize();
    let v = normal.cross(&u);
    let (mut hu, mut lo_v, mut hi_v) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        let d = p - c;
        hu = hu.max(d.dot(&u).abs());
        lo_v = lo_v.min(d.dot(&v));
        hi_v = hi_v.max(d.dot(&v));
    }
    Rect {
        center: c + v * (0.5 * (lo_v + hi_v)),
        normal,
        u_axis: u,
        half_extents: [hu, 0.5 * (hi_v - lo_v)],
    }
}

/// Lays out a complete sensor around `pad`: strips on both long sides (red
/// on +x, green on −x), mirror on the back fin and the camera at the base.
pub fn assemble_scene(
    pad: &GelPadSpec,
    lights: Vec<LedPanel>,
    indenter: Option<IndenterPlacement>,
    materials: BTreeMap<String, MaterialSpec>,
) -> Result<Scene, GeometryError> {
    pad.validate()?;
    let layout = FingerLayout::for_pad(pad);
    let coarse = GelPadSpec {
        resolution: Some([8, 16]),
        layers: Some(2),
        ..*pad
    };
    let generated = super::pad::generate_gelpad(&coarse)?;
    let strips = vec![
        PaintStrip {
            side: StripSide::PlusX,
            rect: side_wall_rect(&generated, true),
            material: RED_PAINT_MATERIAL.to_string(),
        },
        PaintStrip {
            side: StripSide::MinusX,
            rect: side_wall_rect(&generated, false),
            material: GREEN_PAINT_MATERIAL.to_string(),
        },
    ];
    let mirror_rect = layout.mirror_rect(pad);
    let probe = indenter.map(|ind| {
        let c = ind.shape.center();
        ProbeSpec {
            target: vec3(c.x, c.y, 0.0),
            window: default_window(),
        }
    });
    let scene = Scene {
        schema_version: SCHEMA_VERSION,
        camera: layout.camera(&mirror_rect),
        mirror: Some(MirrorSpec {
            rect: mirror_rect,
            material: MIRROR_MATERIAL.to_string(),
            deflection: 0.0,
            segments: default_mirror_segments(),
        }),
        gel: Some(GelSpec {
            pad: *pad,
            source: GelSource::Generated,
            material: GEL_MATERIAL.to_string(),
        }),
        paint_strips: strips,
        led_panels: lights,
        objects: Vec::new(),
        indenter,
        probe,
        materials,
        render: RenderSettings {
            exposure: PRESET_EXPOSURE,
            ..RenderSettings::default()
        },
    };
    scene.validate()?;
    Ok(scene)
}

/// 20 mm diameter cylinder lying across the pad at the layout's indenter
/// position.
pub fn default_indenter(pad: &GelPadSpec, depth: f64) -> IndenterPlacement {
    let layout = FingerLayout::for_pad(pad);
    IndenterPlacement {
        shape: Indenter::Cylinder {
            center: vec3(0.0, layout.indenter_y, 10.0 + 5.0),
            axis: Vec3::x(),
            radius: 10.0,
            half_length: pad.width,
        },
        depth,
        approach: -Vec3::z(),
        settings: DeformSettings::default(),
    }
}

/// Exposure of assembled sensor scenes; the gel sits near 0.02 linear
/// radiance under a unit LED.
pub const PRESET_EXPOSURE: f64 = 16.0;

pub const DEFAULT_BOTTOM_TILT: f64 = 30.0;
pub const DEFAULT_TOP_TILT: f64 = 30.0;

/// Preset scene: pad, one bottom light (plus a top one if `two_lights`) and
/// the default indenter at 1 mm.
pub fn preset_scene(pad: &GelPadSpec, two_lights: bool) -> Result<Scene, GeometryError> {
    let layout = FingerLayout::for_pad(pad);
    let mut lights = vec![layout.bottom_panel(DEFAULT_BOTTOM_TILT, 1.0)];
    if two_lights {
        lights.push(layout.top_panel(DEFAULT_TOP_TILT, 1.0));
    }
    assemble_scene(
        pad,
        lights,
        Some(default_indenter(pad, 1.0)),
        default_materials(),
    )
}

/// The flattest-ellipsoid 35×70 scene used for the illumination studies.
pub fn default_scene() -> Scene {
    let pad = GelPadSpec::preset(super::pad::PadSize::Standard, "ellipsoid", 0)
        .expect("preset pad is valid");
    preset_scene(&pad, false).expect("preset scene is valid")
}

/// Closed box of inward-facing Lambertian walls with albedo `albedo` and
/// uniform emission `radiance`, camera at the centre. Renderer validation.
pub fn furnace_scene(albedo: f64, radiance: f64, max_depth: u32) -> Scene {
    let mut materials = BTreeMap::new();
    materials.insert(
        "wall".to_string(),
        MaterialSpec::Lambertian {
            albedo: [albedo; 3],
            emission: Some([radiance; 3]),
        },
    );
    Scene {
        schema_version: SCHEMA_VERSION,
        camera: Camera {
            position: Vec3::zeros(),
            look_at: vec3(0.3, 1.0, 0.2),
            up: Vec3::z(),
            hfov_deg: 70.0,
        },
        mirror: None,
        gel: None,
        paint_strips: Vec::new(),
        led_panels: Vec::new(),
        objects: vec![SceneObject {
            shape: ObjectShape::Box {
                center: Vec3::zeros(),
                half_extents: vec3(10.0, 10.0, 10.0),
                inward: true,
            },
            material: "wall".to_string(),
        }],
        indenter: None,
        probe: None,
        materials,
        render: RenderSettings {
            max_depth,
            width: 64,
            height: 64,
            ..RenderSettings::default()
        },
    }
}

pub fn is_flat(pad: &GelPadSpec) -> bool {
    matches!(pad.family, PadFamily::Flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pad::{generate_gelpad, PadSize};

    #[test]
    fn default_scene_validates_and_round_trips() {
        let s = default_scene();
        s.validate().unwrap();
        let text = s.to_toml().unwrap();
        assert!(text.contains("schema_version = 1"));
        let back = Scene::from_toml(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn layout_camera_at_base_mirror_between() {
        let pad = GelPadSpec::preset(PadSize::Baby, "flat", 0).unwrap();
        let s = preset_scene(&pad, false).unwrap();
        let cam = s.camera.position;
        assert!(cam.y < -pad.length / 2.0);
        // The ray from the camera to the mirror image of the pad centre
        // crosses the mirror rectangle.
        let m = s.mirror.as_ref().unwrap().rect;
        let dir = (s.camera.look_at - cam).normalize();
        let t = (m.center - cam).dot(&m.normal) / dir.dot(&m.normal);
        assert!(t > 0.0);
        let hit = cam + dir * t - m.center;
        assert!(hit.dot(&m.u_axis).abs() < m.half_extents[0]);
        assert!(hit.dot(&m.v_axis()).abs() < m.half_extents[1]);
        // Mirror faces the pad.
        assert!((Vec3::zeros() - m.center).dot(&m.normal) > 0.0);
    }

    #[test]
    fn two_light_tags() {
        let pad = GelPadSpec::preset(PadSize::Standard, "ellipsoid", 0).unwrap();
        let s = preset_scene(&pad, true).unwrap();
        assert_eq!(s.panels(LedPlacement::Bottom).count(), 1);
        assert_eq!(s.panels(LedPlacement::Top).count(), 1);
    }

    #[test]
    fn zero_lights_is_valid() {
        let pad = GelPadSpec::preset(PadSize::Standard, "flat", 0).unwrap();
        assemble_scene(&pad, vec![], None, default_materials()).unwrap();
    }

    #[test]
    fn missing_material_rejected() {
        let pad = GelPadSpec::preset(PadSize::Standard, "flat", 0).unwrap();
        let mut mats = default_materials();
        mats.remove(RED_PAINT_MATERIAL);
        assert!(matches!(
            assemble_scene(&pad, vec![], None, mats),
            Err(GeometryError::InconsistentMaterials(_))
        ));
    }

    #[test]
    fn strips_on_long_sides_facing_in() {
        let pad = GelPadSpec::flat(35.0, 70.0, 5.0)
            .with_resolution(10, 20)
            .with_layers(2);
        let g = generate_gelpad(&pad).unwrap();
        let r = side_wall_rect(&g, true);
        assert!((r.center.x - 17.5).abs() < 1e-9);
        assert!((r.normal - (-Vec3::x())).norm() < 1e-9);
        assert!((r.half_extents[0] - 35.0).abs() < 1e-9);
        assert!((r.half_extents[1] - 2.5).abs() < 1e-9);
        let l = side_wall_rect(&g, false);
        assert!((l.normal - Vec3::x()).norm() < 1e-9);
    }

    #[test]
    fn tilt_normals() {
        let n = LedPanel::tilt_normal(LedPlacement::Bottom, 90.0);
        assert!((n - Vec3::y()).norm() < 1e-12);
        let t = LedPanel::tilt_normal(LedPlacement::Top, 0.0);
        assert!((t - Vec3::z()).norm() < 1e-12);
        let mut p =
            FingerLayout::for_pad(&GelPadSpec::flat(35.0, 70.0, 5.0)).bottom_panel(10.0, 1.0);
        p.tilt_angle = 180.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn box_object_winding() {
        let b = ObjectShape::Box {
            center: Vec3::zeros(),
            half_extents: vec3(1.0, 2.0, 3.0),
            inward: false,
        }
        .to_trimesh();
        assert!((b.signed_volume() - 48.0).abs() < 1e-12);
        assert!(b.is_watertight() && b.is_consistently_wound());
        let inward = ObjectShape::Box {
            center: Vec3::zeros(),
            half_extents: vec3(1.0, 2.0, 3.0),
            inward: true,
        }
        .to_trimesh();
        assert!((inward.signed_volume() + 48.0).abs() < 1e-12);
    }
}
