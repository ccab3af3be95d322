//! Emissive-texture stand-in for fluorescent paint: strip radiance follows
//! the blue irradiance each source would deliver, without spectral transport.

use super::RenderError;
use crate::color::Rgb;
use crate::geometry::{LedPanel, Rect};
use crate::math::Vec3;
use crate::spectra::FluorescentMaterial;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Source {
    center: Vec3,
    normal: Vec3,
    d0: f64,
    /// absorbed fraction × radiant scale
    weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluorescentTexture {
    sources: Vec<Source>,
    efficiency: f64,
    color: Rgb,
}

impl FluorescentTexture {
    /// Texture with no sources: emits nothing.
    pub fn dark(paint: &FluorescentMaterial) -> FluorescentTexture {
        FluorescentTexture {
            sources: Vec::new(),
            efficiency: paint.conversion_efficiency,
            color: paint.emission_color(),
        }
    }

    /// Radiance emitted at `x`.
    pub fn eval(&self, x: &Vec3) -> Rgb {
        let mut e = 0.0;
        for s in &self.sources {
            let r = x - s.center;
            let d = r.norm();
            let cos = if d > 0.0 { s.normal.dot(&r) / d } else { 1.0 };
            if cos > 0.0 {
                e += s.weight * cos / (1.0 + (d / s.d0).powi(2));
            }
        }
        self.color * (self.efficiency * e)
    }

    pub fn color(&self) -> Rgb {
        self.color
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }
}

/// Builds the strip texture for `paint` lit by `sources`.
///
/// Radiance at x = η · Σ absorbed·radiant_scale·cosθ / (1 + (d/d₀)²) · color,
/// with d the distance to the source centre, θ measured from the source
/// normal and d₀ the mean source half extent. The strip only bounds where
/// the texture is used; evaluation works at any point.
pub fn fluorescent_emission_texture(
    _strip: &Rect,
    paint: &FluorescentMaterial,
    sources: &[LedPanel],
) -> Result<FluorescentTexture, RenderError> {
    if sources.is_empty() {
        return Err(RenderError::SceneInvalid(
            "fluorescent texture needs at least one blue source".into(),
        ));
    }
    let mut tex = FluorescentTexture::dark(paint);
    for s in sources {
        tex.sources.push(Source {
            center: s.center,
            normal: s.normal,
            d0: s.characteristic_size(),
            weight: paint.absorbed_fraction(&s.emission) * s.radiant_scale,
        });
    }
    Ok(tex)
}
