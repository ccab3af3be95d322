//! Scene → immutable render structures. Static geometry lives in a shared
//! BVH; LED panels are kept outside it so light sweeps reuse the hierarchy.

use std::sync::Arc;

use super::bvh::{Bvh, Ray};
use super::camera::PinholeCamera;
use super::fluorescence::{fluorescent_emission_texture, FluorescentTexture};
use super::material::Bsdf;
use super::{RenderError, RenderSettings};
use crate::color::Rgb;
use crate::deform::{deform_mirror, indent_surface, IndentReport, EXTERNAL_SOURCE};
use crate::geometry::{generate_gelpad, GelSource, LedPanel, MaterialSpec, Rect, Scene};
use crate::math::Vec3;
use crate::meshconvert::{hex_to_surface, read_neutral, sensing_triangles, Strictness, TriMesh};
use crate::spectra::{spectrum_to_rgb, FluorescentMaterial};

/// What a surface belongs to, used for region masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceTag {
    Gel,
    Mirror,
    Strip(usize),
    Object(usize),
    Panel(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Emission {
    None,
    Constant(Rgb),
    /// Index into the fluorescent texture table.
    Texture(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Surface {
    pub bsdf: Bsdf,
    pub emission: Emission,
    pub tag: SurfaceTag,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TriData {
    pub v: [Vec3; 3],
    /// Unit geometric normal following the winding (the emitting side).
    pub ng: Vec3,
    /// Per-vertex shading normals for smooth surfaces.
    pub ns: Option<[Vec3; 3]>,
    pub surface: u32,
}

#[derive(Debug)]
pub(crate) struct StaticGeometry {
    pub bvh: Bvh,
    pub tris: Vec<TriData>,
    pub surfaces: Vec<Surface>,
    /// (strip rectangle, paint) per paint strip; textures depend on the lights.
    pub strips: Vec<(Rect, FluorescentMaterial)>,
    /// Flat mirror used for virtual-light sampling: (rect, reflectance, surface).
    pub planar_mirror: Option<(Rect, f64, u32)>,
    pub diagonal: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct PanelLight {
    pub rect: Rect,
    pub radiance: Rgb,
}

impl PanelLight {
    /// Ray parameter of the hit with the panel, either side.
    pub fn intersect(&self, ray: &Ray, tmin: f64, tmax: f64) -> Option<f64> {
        let r = &self.rect;
        let denom = ray.dir.dot(&r.normal);
        if denom.abs() < 1e-14 {
            return None;
        }
        let t = (r.center - ray.origin).dot(&r.normal) / denom;
        if !(t > tmin && t < tmax) {
            return None;
        }
        let d = ray.at(t) - r.center;
        let inside = d.dot(&r.u_axis).abs() <= r.half_extents[0]
            && d.dot(&r.v_axis()).abs() <= r.half_extents[1];
        inside.then_some(t)
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct LightSampler {
    pub lights: Vec<(usize, f64)>,
    cdf: Vec<f64>,
}

impl LightSampler {
    fn new(lights: Vec<(usize, f64)>) -> LightSampler {
        let total: f64 = lights.iter().map(|(_, w)| w).sum();
        if !(total > 0.0) {
            return LightSampler::default();
        }
        let mut acc = 0.0;
        let cdf = lights
            .iter()
            .map(|(_, w)| {
                acc += w;
                acc / total
            })
            .collect();
        LightSampler { lights, cdf }
    }

    pub fn is_empty(&self) -> bool {
        self.lights.is_empty()
    }

    /// Picks a light; returns its index and selection probability.
    pub fn pick(&self, u: f64) -> (usize, f64) {
        self.pick_probability(
            self.cdf
                .partition_point(|&c| c <= u)
                .min(self.cdf.len() - 1),
        )
    }

    pub fn pick_probability(&self, i: usize) -> (usize, f64) {
        let lo = if i == 0 { 0.0 } else { self.cdf[i - 1] };
        (i, self.cdf[i] - lo)
    }
}

/// A scene compiled for rendering. Panels and strips each get one light
/// sample per vertex; emissive triangles share one sample picked by power.
#[derive(Debug, Clone)]
pub struct RenderScene {
    pub(crate) geometry: Arc<StaticGeometry>,
    pub(crate) panels: Vec<PanelLight>,
    pub(crate) textures: Vec<FluorescentTexture>,
    pub(crate) lights: LightSampler,
    /// Area density with which the shared triangle estimator picks each
    /// point of each triangle (zero for non-emitters).
    pub(crate) tri_light_pdf: Vec<f64>,
    pub(crate) camera: PinholeCamera,
    pub settings: RenderSettings,
    pub probe: Option<(Vec3, u32)>,
    /// Present when the gel was deformed while compiling.
    pub indent: Option<IndentReport>,
    pub deformation_source: Option<String>,
}

fn invalid<E: std::fmt::Display>(e: E) -> RenderError {
    RenderError::SceneInvalid(e.to_string())
}

/// Blue LED radiance: radiant scale times the unit-max RGB of its spectrum.
pub fn led_radiance(panel: &LedPanel) -> Result<Rgb, RenderError> {
    let c = spectrum_to_rgb(&panel.emission).map_err(invalid)?;
    Ok(c.clamp(0.0, f64::INFINITY).normalized_to_unit_max() * panel.radiant_scale)
}

struct Builder {
    tris: Vec<TriData>,
    surfaces: Vec<Surface>,
}

impl Builder {
    fn add(&mut self, mesh: &TriMesh, smooth: bool, surface: Surface) {
        let sid = self.surfaces.len() as u32;
        self.surfaces.push(surface);
        let vn = smooth.then(|| mesh.vertex_normals());
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let Some(ng) = mesh.triangle_cross(t).try_normalize(0.0) else {
                continue;
            };
            self.tris.push(TriData {
                v: tri.map(|i| mesh.vertices[i]),
                ng,
                ns: vn.as_ref().map(|n| tri.map(|i| n[i])),
                surface: sid,
            });
        }
    }
}

type GelBuild = (TriMesh, Option<IndentReport>, Option<String>);

fn build_gel(scene: &Scene) -> Result<Option<GelBuild>, RenderError> {
    let Some(gel) = &scene.gel else {
        return Ok(None);
    };
    match &gel.source {
        GelSource::Generated => {
            // Only the sensing face is visible; one layer is enough.
            let spec = gel.pad.with_layers(1);
            let pad = generate_gelpad(&spec).map_err(invalid)?;
            match &scene.indenter {
                Some(ind) => {
                    let (mesh, report) = indent_surface(
                        &pad.sensing_face,
                        &ind.shape,
                        ind.approach,
                        ind.depth,
                        &ind.settings,
                    )
                    .map_err(invalid)?;
                    let src = report.source.to_string();
                    Ok(Some((mesh, Some(report), Some(src))))
                }
                None => Ok(Some((pad.sensing_face, None, None))),
            }
        }
        GelSource::NeutralMesh { path } => {
            let file = std::fs::File::open(path)
                .map_err(|e| RenderError::SceneInvalid(format!("{}: {e}", path.display())))?;
            let nm = read_neutral(std::io::BufReader::new(file)).map_err(invalid)?;
            // The file's own provenance line wins; displaced meshes without
            // one are assumed to come from an external solver.
            let (hex, source) = if nm.mesh.displacements.is_some() {
                let src = nm
                    .source
                    .clone()
                    .unwrap_or_else(|| EXTERNAL_SOURCE.to_string());
                (nm.mesh.apply_displacements().map_err(invalid)?, Some(src))
            } else {
                (nm.mesh, nm.source.clone())
            };
            let (surface, _) = hex_to_surface(&hex, Strictness::Repair).map_err(invalid)?;
            let ids = sensing_triangles(&surface, &hex);
            if ids.is_empty() {
                return Err(RenderError::SceneInvalid(
                    "neutral mesh has no sensing face".into(),
                ));
            }
            Ok(Some((surface.mesh.submesh(&ids).0, None, source)))
        }
    }
}

impl RenderScene {
    /// Validates and compiles `scene`, deforming the gel if it has an indenter.
    pub fn build(scene: &Scene) -> Result<RenderScene, RenderError> {
        scene.validate().map_err(invalid)?;
        let mut b = Builder {
            tris: Vec::new(),
            surfaces: Vec::new(),
        };
        let material = |id: &str| {
            scene
                .materials
                .get(id)
                .copied()
                .ok_or_else(|| invalid(format!("unknown material {id}")))
        };

        let (indent, deformation_source) = match build_gel(scene)? {
            Some((mesh, report, src)) => {
                let gel = scene.gel.as_ref().expect("gel present");
                let spec = material(&gel.material)?;
                b.add(
                    &mesh,
                    true,
                    Surface {
                        bsdf: Bsdf::from_spec(&spec, None),
                        emission: Emission::None,
                        tag: SurfaceTag::Gel,
                    },
                );
                (report, src)
            }
            None => (None, None),
        };

        let mut planar_mirror = None;
        if let Some(m) = &scene.mirror {
            let mesh = deform_mirror(&m.rect, m.deflection, m.segments);
            let spec = material(&m.material)?;
            match spec {
                MaterialSpec::Mirror { reflectance } if m.deflection == 0.0 => {
                    planar_mirror = Some((m.rect, reflectance, b.surfaces.len() as u32));
                }
                _ => {}
            }
            b.add(
                &mesh,
                false,
                Surface {
                    bsdf: Bsdf::from_spec(&material(&m.material)?, None),
                    emission: Emission::None,
                    tag: SurfaceTag::Mirror,
                },
            );
        }

        let mut strips = Vec::new();
        for (k, s) in scene.paint_strips.iter().enumerate() {
            let MaterialSpec::Fluorescent {
                preset,
                conversion_efficiency,
            } = material(&s.material)?
            else {
                return Err(invalid("paint strip material is not fluorescent"));
            };
            let paint = preset
                .material()
                .with_conversion_efficiency(conversion_efficiency)
                .map_err(invalid)?;
            b.add(
                &s.rect.to_trimesh(),
                false,
                Surface {
                    bsdf: Bsdf::Lambertian {
                        albedo: paint.base_albedo(),
                    },
                    emission: Emission::Texture(k),
                    tag: SurfaceTag::Strip(k),
                },
            );
            strips.push((s.rect, paint));
        }

        for (k, o) in scene.objects.iter().enumerate() {
            let spec = material(&o.material)?;
            let emission = match spec {
                MaterialSpec::Lambertian {
                    emission: Some(e), ..
                } => Emission::Constant(Rgb(e)),
                _ => Emission::None,
            };
            b.add(
                &o.shape.to_trimesh(),
                false,
                Surface {
                    bsdf: Bsdf::from_spec(&spec, None),
                    emission,
                    tag: SurfaceTag::Object(k),
                },
            );
        }

        let bvh = Bvh::build(&b.tris.iter().map(|t| t.v).collect::<Vec<_>>());
        let mut lo = scene.camera.position;
        let mut hi = lo;
        for t in &b.tris {
            for v in &t.v {
                lo = lo.inf(v);
                hi = hi.sup(v);
            }
        }
        let geometry = Arc::new(StaticGeometry {
            bvh,
            tris: b.tris,
            surfaces: b.surfaces,
            strips,
            planar_mirror,
            diagonal: (hi - lo).norm().max(1.0),
        });
        let settings = scene.render;
        let mut rs = RenderScene {
            geometry,
            panels: Vec::new(),
            textures: Vec::new(),
            lights: LightSampler::default(),
            tri_light_pdf: Vec::new(),
            camera: PinholeCamera::new(&scene.camera, settings.width, settings.height),
            settings,
            probe: scene.probe.map(|p| (p.target, p.window as u32)),
            indent,
            deformation_source,
        };
        rs.set_lights(&scene.led_panels)?;
        Ok(rs)
    }

    /// Same geometry under a different set of LED panels.
    pub fn with_lights(&self, panels: &[LedPanel]) -> Result<RenderScene, RenderError> {
        let mut rs = self.clone();
        rs.set_lights(panels)?;
        Ok(rs)
    }

    fn set_lights(&mut self, panels: &[LedPanel]) -> Result<(), RenderError> {
        self.panels = panels
            .iter()
            .map(|p| {
                p.validate().map_err(invalid)?;
                Ok(PanelLight {
                    rect: p.rect(),
                    radiance: led_radiance(p)?,
                })
            })
            .collect::<Result<_, RenderError>>()?;
        let g = &self.geometry;
        self.textures = g
            .strips
            .iter()
            .map(|(rect, paint)| {
                if panels.is_empty() {
                    Ok(FluorescentTexture::dark(paint))
                } else {
                    fluorescent_emission_texture(rect, paint, panels)
                }
            })
            .collect::<Result<_, _>>()?;

        let mut lights = Vec::new();
        for (t, tri) in g.tris.iter().enumerate() {
            if let Emission::Constant(e) = g.surfaces[tri.surface as usize].emission {
                let area = 0.5 * (tri.v[1] - tri.v[0]).cross(&(tri.v[2] - tri.v[0])).norm();
                lights.push((t, area * e.max_channel()));
            }
        }
        self.lights = LightSampler::new(lights);
        self.tri_light_pdf = vec![0.0; g.tris.len()];
        for (i, &(t, _)) in self.lights.lights.iter().enumerate() {
            let (_, p) = self.lights.pick_probability(i);
            let v = &g.tris[t].v;
            self.tri_light_pdf[t] = p / (0.5 * (v[1] - v[0]).cross(&(v[2] - v[0])).norm());
        }
        Ok(())
    }

    pub fn triangle_count(&self) -> usize {
        self.geometry.tris.len()
    }

    /// Panels, strips and emissive triangles.
    pub fn light_count(&self) -> usize {
        self.panels.len() + self.geometry.strips.len() + self.lights.lights.len()
    }

    pub fn camera(&self) -> &PinholeCamera {
        &self.camera
    }
}
