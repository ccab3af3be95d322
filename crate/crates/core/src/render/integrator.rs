use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bvh::Ray;
use super::compile::{Emission, RenderScene, SurfaceTag};
use super::image::Image;
use super::RenderError;
use crate::color::Rgb;
use crate::math::Vec3;

/// Origin offset for secondary rays (scene units are millimetres).
const RAY_EPS: f64 = 1e-5;

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "FINRAY_THREADS";

/// Thread count from [`THREADS_ENV`], else the available parallelism.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[derive(Debug, Clone, Copy)]
enum Target {
    Tri { tri: usize, u: f64, v: f64 },
    Panel(usize),
}

#[derive(Debug, Clone, Copy)]
struct Intersection {
    t: f64,
    target: Target,
}

/// First surface seen through a pixel centre after any mirror bounces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryHit {
    pub point: Vec3,
    pub tag: SurfaceTag,
    /// Reached after at least one mirror bounce.
    pub mirrored: bool,
}

impl RenderScene {
    fn intersect(&self, ray: &Ray, tmax: f64) -> Option<Intersection> {
        let mut best = self
            .geometry
            .bvh
            .intersect(ray, 0.0, tmax)
            .map(|h| Intersection {
                t: h.t,
                target: Target::Tri {
                    tri: h.tri as usize,
                    u: h.u,
                    v: h.v,
                },
            });
        for (i, p) in self.panels.iter().enumerate() {
            let lim = best.map_or(tmax, |b| b.t);
            if let Some(t) = p.intersect(ray, 0.0, lim) {
                best = Some(Intersection {
                    t,
                    target: Target::Panel(i),
                });
            }
        }
        best
    }

    fn occluded(&self, ray: &Ray, tmax: f64) -> bool {
        self.panels
            .iter()
            .any(|p| p.intersect(ray, 0.0, tmax).is_some())
            || self.geometry.bvh.occluded(ray, 0.0, tmax)
    }

    /// Radiance leaving a light point toward `-dir`.
    fn emitted(&self, target: Target, point: &Vec3, dir: &Vec3) -> Rgb {
        match target {
            Target::Panel(i) => {
                let p = &self.panels[i];
                if dir.dot(&p.rect.normal) < 0.0 {
                    p.radiance
                } else {
                    Rgb::BLACK
                }
            }
            Target::Tri { tri, .. } => {
                let td = &self.geometry.tris[tri];
                if dir.dot(&td.ng) >= 0.0 {
                    return Rgb::BLACK;
                }
                match self.geometry.surfaces[td.surface as usize].emission {
                    Emission::None => Rgb::BLACK,
                    Emission::Constant(e) => e,
                    Emission::Texture(k) => self.textures[k].eval(point),
                }
            }
        }
    }

    /// Number of light estimators per scattering vertex: one per panel, one
    /// per strip and one shared by emissive triangles.
    fn estimator_count(&self) -> usize {
        self.panels.len() + self.geometry.strips.len() + usize::from(!self.lights.is_empty())
    }

    /// Samples estimator `j`: (point, unit normal, radiance, area pdf).
    fn sample_light(&self, j: usize, rng: &mut ChaCha8Rng) -> (Vec3, Vec3, Rgb, f64) {
        let (u1, u2): (f64, f64) = (rng.random(), rng.random());
        let np = self.panels.len();
        let ns = self.geometry.strips.len();
        if j < np {
            let p = &self.panels[j];
            let y = p.rect.point(2.0 * u1 - 1.0, 2.0 * u2 - 1.0);
            return (y, p.rect.normal, p.radiance, 1.0 / p.rect.area());
        }
        if j < np + ns {
            let k = j - np;
            let r = &self.geometry.strips[k].0;
            let y = r.point(2.0 * u1 - 1.0, 2.0 * u2 - 1.0);
            return (y, r.normal, self.textures[k].eval(&y), 1.0 / r.area());
        }
        let (i, p_pick) = self.lights.pick(rng.random());
        let t = self.lights.lights[i].0;
        let td = &self.geometry.tris[t];
        let s = u1.sqrt();
        let (b1, b2) = (s * (1.0 - u2), s * u2);
        let y = td.v[0] + (td.v[1] - td.v[0]) * b1 + (td.v[2] - td.v[0]) * b2;
        let area = 0.5 * (td.v[1] - td.v[0]).cross(&(td.v[2] - td.v[0])).norm();
        let le = self.emitted(
            Target::Tri {
                tri: t,
                u: b1,
                v: b2,
            },
            &y,
            &-td.ng,
        );
        (y, td.ng, le, p_pick / area)
    }

    fn shading_frame(&self, target: Target, dir: &Vec3) -> (Vec3, Vec3, usize) {
        match target {
            Target::Panel(_) => unreachable!("panels terminate paths"),
            Target::Tri { tri, u, v } => {
                let td = &self.geometry.tris[tri];
                let ng = if td.ng.dot(dir) < 0.0 { td.ng } else { -td.ng };
                let ns = match td.ns {
                    Some(n) => {
                        let s = (n[0] * (1.0 - u - v) + n[1] * u + n[2] * v)
                            .try_normalize(0.0)
                            .unwrap_or(td.ng);
                        if s.dot(&ng) < 0.0 {
                            -s
                        } else {
                            s
                        }
                    }
                    None => ng,
                };
                (ng, ns, td.surface as usize)
            }
        }
    }

    /// Light from a panel reflected once by the flat mirror, sampled through
    /// the panel's mirror image.
    #[allow(clippy::too_many_arguments)]
    fn mirrored_panel_light(
        &self,
        k: usize,
        origin: &Vec3,
        ng: &Vec3,
        ns: &Vec3,
        wo: &Vec3,
        bsdf: &super::material::Bsdf,
        rng: &mut ChaCha8Rng,
    ) -> Rgb {
        let Some((mirror, reflectance, _)) = &self.geometry.planar_mirror else {
            return Rgb::BLACK;
        };
        let (u1, u2): (f64, f64) = (rng.random(), rng.random());
        let panel = &self.panels[k];
        let y = panel.rect.point(2.0 * u1 - 1.0, 2.0 * u2 - 1.0);
        let mn = mirror.normal;
        let (hx, hy) = (
            (origin - mirror.center).dot(&mn),
            (y - mirror.center).dot(&mn),
        );
        if hx * hy <= 0.0 {
            return Rgb::BLACK;
        }
        let image = y - mn * (2.0 * hy);
        let image_normal = panel.rect.normal - mn * (2.0 * panel.rect.normal.dot(&mn));
        let d = image - origin;
        let dist = d.norm();
        let wi = d / dist;
        let (cx, cy) = (wi.dot(ns), -wi.dot(&image_normal));
        if cx <= 0.0 || cy <= 0.0 || wi.dot(ng) <= 0.0 {
            return Rgb::BLACK;
        }
        // Reflection point on the mirror plane.
        let t_m = dist * hx / (hx + hy);
        let m = origin + wi * t_m;
        let r = m - mirror.center;
        if r.dot(&mirror.u_axis).abs() > mirror.half_extents[0]
            || r.dot(&mirror.v_axis()).abs() > mirror.half_extents[1]
        {
            return Rgb::BLACK;
        }
        let f = bsdf.eval(wo, &wi, ns);
        if f.is_black() {
            return Rgb::BLACK;
        }
        let eps = RAY_EPS * self.geometry.diagonal.max(1.0) / 100.0;
        if self.occluded(
            &Ray {
                origin: *origin,
                dir: wi,
            },
            t_m - eps,
        ) {
            return Rgb::BLACK;
        }
        let to_y = y - m;
        let seg = to_y.norm();
        let dir2 = to_y / seg;
        let back = if hx > 0.0 { mn } else { -mn };
        if self.occluded(
            &Ray {
                origin: m + back * eps,
                dir: dir2,
            },
            seg * (1.0 - 1e-7) - eps,
        ) {
            return Rgb::BLACK;
        }
        let pdf = 1.0 / panel.rect.area();
        f * panel.radiance * (reflectance * cx * cy / (dist * dist * pdf))
    }

    /// Area density with which the light estimators sample `target`.
    fn light_area_pdf(&self, target: Target) -> f64 {
        match target {
            Target::Panel(k) => 1.0 / self.panels[k].rect.area(),
            Target::Tri { tri, .. } => {
                match self.geometry.surfaces[self.geometry.tris[tri].surface as usize].emission {
                    Emission::None => 0.0,
                    Emission::Constant(_) => self.tri_light_pdf[tri],
                    Emission::Texture(k) => 1.0 / self.geometry.strips[k].0.area(),
                }
            }
        }
    }

    fn light_normal(&self, target: Target) -> Vec3 {
        match target {
            Target::Panel(k) => self.panels[k].rect.normal,
            Target::Tri { tri, .. } => self.geometry.tris[tri].ng,
        }
    }

    /// Radiance along a camera ray. Direct light is estimated both by light
    /// sampling and by BSDF sampling, combined with the power heuristic.
    fn radiance(&self, mut ray: Ray, rng: &mut ChaCha8Rng) -> Rgb {
        let s = &self.settings;
        let mut l = Rgb::BLACK;
        let mut beta = Rgb::WHITE;
        // BSDF density of the last bounce when it was a scattering one.
        let mut prev_pdf: Option<f64> = None;
        // Panels seen through one flat-mirror bounce after a scattering
        // vertex are covered by the mirrored-light estimate instead.
        let mut skip_panels = false;
        let mut prev_scattered = false;
        for depth in 0..=s.max_depth {
            let Some(hit) = self.intersect(&ray, f64::INFINITY) else {
                break;
            };
            let x = ray.at(hit.t);
            let le = self.emitted(hit.target, &x, &ray.dir);
            if !le.is_black() {
                let w = match prev_pdf {
                    Some(pb) => {
                        let cos = ray.dir.dot(&self.light_normal(hit.target)).abs();
                        let pl = self.light_area_pdf(hit.target) * hit.t * hit.t / cos.max(1e-12);
                        pb * pb / (pb * pb + pl * pl)
                    }
                    None if skip_panels && matches!(hit.target, Target::Panel(_)) => 0.0,
                    None => 1.0,
                };
                l += beta * le * w;
            }
            if depth == s.max_depth || matches!(hit.target, Target::Panel(_)) {
                break;
            }
            let (ng, ns, sid) = self.shading_frame(hit.target, &ray.dir);
            let bsdf = self.geometry.surfaces[sid].bsdf;
            let wo = -ray.dir;
            let origin = x + ng * (RAY_EPS * self.geometry.diagonal.max(1.0) / 100.0);

            if !bsdf.is_delta() {
                for j in 0..self.estimator_count() {
                    let (y, ny, le, pdf) = self.sample_light(j, rng);
                    let d = y - origin;
                    let dist = d.norm();
                    let wi = d / dist;
                    let (cx, cy) = (wi.dot(&ns), -wi.dot(&ny));
                    if pdf > 0.0 && cx > 0.0 && cy > 0.0 && wi.dot(&ng) > 0.0 && !le.is_black() {
                        let f = bsdf.eval(&wo, &wi, &ns);
                        if !f.is_black()
                            && !self
                                .occluded(&Ray { origin, dir: wi }, dist * (1.0 - 1e-7) - RAY_EPS)
                        {
                            let pl = pdf * dist * dist / cy;
                            let pb = bsdf.pdf(&wo, &wi, &ns);
                            let w = pl * pl / (pl * pl + pb * pb);
                            l += beta * f * le * (w * cx / pl);
                        }
                    }
                }
                for k in 0..self.panels.len() {
                    l += beta * self.mirrored_panel_light(k, &origin, &ng, &ns, &wo, &bsdf, rng);
                }
            }

            let Some(bs) = bsdf.sample(&wo, &ns, rng) else {
                break;
            };
            if bs.wi.dot(&ng) <= 0.0 {
                break;
            }
            beta *= bs.weight;
            prev_pdf = (!bs.delta).then_some(bs.pdf);
            let via_flat_mirror = self
                .geometry
                .planar_mirror
                .as_ref()
                .is_some_and(|m| m.2 as usize == sid);
            skip_panels = prev_scattered && via_flat_mirror;
            prev_scattered = !bs.delta;
            ray = Ray { origin, dir: bs.wi };
            if depth + 1 >= s.rr_start_depth {
                let q = beta.max_channel().min(0.95);
                if q <= 0.0 || rng.random::<f64>() >= q {
                    break;
                }
                beta = beta / q;
            }
        }
        l
    }

    fn render_row(&self, y: u32, out: &mut [Rgb]) {
        let s = &self.settings;
        for (x, px) in out.iter_mut().enumerate() {
            let index = y as u64 * s.width as u64 + x as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix(s.seed ^ splitmix(index)));
            let mut acc = Rgb::BLACK;
            for _ in 0..s.samples_per_pixel {
                let (jx, jy): (f64, f64) = (rng.random(), rng.random());
                acc += self.radiance(self.camera.ray(x as f64 + jx, y as f64 + jy), &mut rng);
            }
            *px = acc * (s.exposure / s.samples_per_pixel as f64);
        }
    }

    /// Renders with `threads` workers (None: [`threads_from_env`]). The
    /// result does not depend on the thread count.
    pub fn render_with_threads(&self, threads: Option<usize>) -> Result<Image, RenderError> {
        self.settings.validate()?;
        let (w, h) = (self.settings.width, self.settings.height);
        let mut img = Image::new(w, h);
        let threads = threads.unwrap_or_else(threads_from_env).max(1);
        self.fill(&mut img, threads)?;
        if !img.is_finite() {
            return Err(RenderError::ImageNaN);
        }
        Ok(img)
    }

    #[cfg(feature = "parallel")]
    fn fill(&self, img: &mut Image, threads: usize) -> Result<(), RenderError> {
        use rayon::prelude::*;
        let w = img.width as usize;
        if threads == 1 {
            for (y, row) in img.pixels.chunks_mut(w).enumerate() {
                self.render_row(y as u32, row);
            }
            return Ok(());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| RenderError::SceneInvalid(format!("thread pool: {e}")))?;
        pool.install(|| {
            img.pixels
                .par_chunks_mut(w)
                .enumerate()
                .for_each(|(y, row)| self.render_row(y as u32, row));
        });
        Ok(())
    }

    #[cfg(not(feature = "parallel"))]
    fn fill(&self, img: &mut Image, _threads: usize) -> Result<(), RenderError> {
        let w = img.width as usize;
        for (y, row) in img.pixels.chunks_mut(w).enumerate() {
            self.render_row(y as u32, row);
        }
        Ok(())
    }

    pub fn render(&self) -> Result<Image, RenderError> {
        self.render_with_threads(None)
    }

    /// Pixel-centre rays followed through mirrors to the first non-specular
    /// surface.
    pub fn primary_hits(&self) -> Vec<Option<PrimaryHit>> {
        let (w, h) = (self.settings.width, self.settings.height);
        let mut out = Vec::with_capacity((w * h) as usize);
        for y in 0..h {
            for x in 0..w {
                let mut ray = self.camera.ray(x as f64 + 0.5, y as f64 + 0.5);
                let mut found = None;
                for bounce in 0..=self.settings.max_depth {
                    let mirrored = bounce > 0;
                    let Some(hit) = self.intersect(&ray, f64::INFINITY) else {
                        break;
                    };
                    let p = ray.at(hit.t);
                    if let Target::Panel(i) = hit.target {
                        found = Some(PrimaryHit {
                            point: p,
                            tag: SurfaceTag::Panel(i),
                            mirrored,
                        });
                        break;
                    }
                    let (ng, ns, sid) = self.shading_frame(hit.target, &ray.dir);
                    let surf = &self.geometry.surfaces[sid];
                    if !surf.bsdf.is_delta() {
                        found = Some(PrimaryHit {
                            point: p,
                            tag: surf.tag,
                            mirrored,
                        });
                        break;
                    }
                    let d = ray.dir;
                    ray = Ray {
                        origin: p + ng * RAY_EPS,
                        dir: d - ns * (2.0 * d.dot(&ns)),
                    };
                }
                out.push(found);
            }
        }
        out
    }

    fn gel_pixels(hits: &[Option<PrimaryHit>]) -> Vec<Option<Vec3>> {
        let through_mirror = hits
            .iter()
            .flatten()
            .any(|h| h.tag == SurfaceTag::Gel && h.mirrored);
        hits.iter()
            .map(|h| match h {
                Some(h) if h.tag == SurfaceTag::Gel && (h.mirrored || !through_mirror) => {
                    Some(h.point)
                }
                _ => None,
            })
            .collect()
    }

    /// Pixels showing the gel surface. When part of the gel is seen through
    /// the mirror only that image counts, as on the real sensor.
    pub fn gel_mask(&self) -> Vec<bool> {
        Self::gel_pixels(&self.primary_hits())
            .iter()
            .map(Option::is_some)
            .collect()
    }

    /// Pixel of the gel image nearest to `target`.
    pub fn locate(&self, target: &Vec3) -> Result<(u32, u32), RenderError> {
        let w = self.settings.width;
        Self::gel_pixels(&self.primary_hits())
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (i, (p - target).norm())))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| (i as u32 % w, i as u32 / w))
            .ok_or_else(|| RenderError::Probe("the gel surface is not visible".into()))
    }

    /// Probe pixel and window from the scene's probe spec.
    pub fn probe_pixel(&self) -> Result<(u32, u32, u32), RenderError> {
        let (target, window) = self
            .probe
            .ok_or_else(|| RenderError::Probe("scene has no probe".into()))?;
        let (x, y) = self.locate(&target)?;
        Ok((x, y, window))
    }
}
