use std::f64::consts::PI;

use rand::Rng;

use crate::color::Rgb;
use crate::geometry::MaterialSpec;
use crate::math::{orthonormal_basis, Vec3};

/// Reflectance model of a compiled surface. Directions point away from the
/// surface; `n` is the shading normal on the side of `wo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bsdf {
    Lambertian {
        albedo: Rgb,
    },
    Mirror {
        reflectance: f64,
    },
    /// Diffuse base plus a normalised Phong lobe around the mirror direction.
    CoatedFlake {
        albedo: Rgb,
        specular: f64,
        exponent: f64,
        /// Probability of sampling the diffuse part.
        diffuse_pick: f64,
    },
    Black,
}

/// Outcome of importance sampling a BSDF.
#[derive(Debug, Clone, Copy)]
pub struct BsdfSample {
    pub wi: Vec3,
    /// f · cos / pdf, or the reflectance for delta lobes.
    pub weight: Rgb,
    /// Solid-angle density of `wi`; zero for delta lobes.
    pub pdf: f64,
    pub delta: bool,
}

fn reflect(w: &Vec3, n: &Vec3) -> Vec3 {
    n * (2.0 * w.dot(n)) - w
}

fn cosine_hemisphere<R: Rng>(n: &Vec3, rng: &mut R) -> Vec3 {
    let (u1, u2): (f64, f64) = (rng.random(), rng.random());
    let r = u1.sqrt();
    let phi = 2.0 * PI * u2;
    let (t, b) = orthonormal_basis(n);
    (t * (r * phi.cos()) + b * (r * phi.sin()) + n * (1.0 - u1).max(0.0).sqrt()).normalize()
}

fn phong_lobe<R: Rng>(axis: &Vec3, exponent: f64, rng: &mut R) -> Vec3 {
    let (u1, u2): (f64, f64) = (rng.random(), rng.random());
    let cos = u1.powf(1.0 / (exponent + 1.0));
    let sin = (1.0 - cos * cos).max(0.0).sqrt();
    let phi = 2.0 * PI * u2;
    let (t, b) = orthonormal_basis(axis);
    (t * (sin * phi.cos()) + b * (sin * phi.sin()) + axis * cos).normalize()
}

impl Bsdf {
    pub fn from_spec(spec: &MaterialSpec, base_albedo: Option<Rgb>) -> Bsdf {
        match *spec {
            MaterialSpec::Lambertian { albedo, .. } => Bsdf::Lambertian {
                albedo: Rgb(albedo),
            },
            MaterialSpec::Mirror { reflectance } => Bsdf::Mirror { reflectance },
            MaterialSpec::CoatedFlake {
                albedo,
                specular_fraction,
                roughness,
            } => {
                let albedo = Rgb(albedo);
                if specular_fraction <= 0.0 {
                    return Bsdf::Lambertian { albedo };
                }
                let r = roughness.max(0.01);
                let d = albedo.luminance();
                Bsdf::CoatedFlake {
                    albedo,
                    specular: specular_fraction,
                    exponent: 2.0 / (r * r) - 2.0,
                    diffuse_pick: d / (d + specular_fraction),
                }
            }
            MaterialSpec::Fluorescent { .. } => Bsdf::Lambertian {
                albedo: base_albedo.unwrap_or(Rgb::BLACK),
            },
        }
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, Bsdf::Mirror { .. })
    }

    /// BSDF value for a non-delta pair; zero below the surface.
    pub fn eval(&self, wo: &Vec3, wi: &Vec3, n: &Vec3) -> Rgb {
        if wi.dot(n) <= 0.0 {
            return Rgb::BLACK;
        }
        match *self {
            Bsdf::Lambertian { albedo } => albedo * (1.0 / PI),
            Bsdf::CoatedFlake {
                albedo,
                specular,
                exponent,
                ..
            } => {
                let c = reflect(wo, n).dot(wi).max(0.0);
                albedo * (1.0 / PI)
                    + Rgb::splat(specular * (exponent + 2.0) / (2.0 * PI) * c.powf(exponent))
            }
            Bsdf::Mirror { .. } | Bsdf::Black => Rgb::BLACK,
        }
    }

    /// Solid-angle density of [`Bsdf::sample`] producing `wi`.
    pub fn pdf(&self, wo: &Vec3, wi: &Vec3, n: &Vec3) -> f64 {
        let cos = wi.dot(n);
        if cos <= 0.0 {
            return 0.0;
        }
        match *self {
            Bsdf::Lambertian { .. } => cos / PI,
            Bsdf::CoatedFlake {
                exponent,
                diffuse_pick,
                ..
            } => {
                let c = reflect(wo, n).dot(wi).max(0.0);
                diffuse_pick * cos / PI
                    + (1.0 - diffuse_pick) * (exponent + 1.0) / (2.0 * PI) * c.powf(exponent)
            }
            _ => 0.0,
        }
    }

    pub fn sample<R: Rng>(&self, wo: &Vec3, n: &Vec3, rng: &mut R) -> Option<BsdfSample> {
        match *self {
            Bsdf::Black => None,
            Bsdf::Mirror { reflectance } => Some(BsdfSample {
                wi: reflect(wo, n),
                weight: Rgb::splat(reflectance),
                pdf: 0.0,
                delta: true,
            }),
            Bsdf::Lambertian { albedo } => {
                let wi = cosine_hemisphere(n, rng);
                Some(BsdfSample {
                    wi,
                    weight: albedo,
                    pdf: wi.dot(n).max(0.0) / PI,
                    delta: false,
                })
            }
            Bsdf::CoatedFlake {
                exponent,
                diffuse_pick,
                ..
            } => {
                let wi = if rng.random::<f64>() < diffuse_pick {
                    cosine_hemisphere(n, rng)
                } else {
                    phong_lobe(&reflect(wo, n), exponent, rng)
                };
                let pdf = self.pdf(wo, &wi, n);
                if pdf <= 0.0 {
                    return None;
                }
                Some(BsdfSample {
                    wi,
                    weight: self.eval(wo, &wi, n) * (wi.dot(n) / pdf),
                    pdf,
                    delta: false,
                })
            }
        }
    }
}
