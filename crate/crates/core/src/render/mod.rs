//! CPU path tracer for sensor scenes.

mod bvh;
mod camera;
mod compile;
mod fluorescence;
mod image;
mod integrator;
mod material;
mod settings;

pub use bvh::{Bvh, Hit, Ray};
pub use camera::PinholeCamera;
pub use compile::{led_radiance, RenderScene, SurfaceTag};
pub use fluorescence::{fluorescent_emission_texture, FluorescentTexture};
pub use image::{masked_stats, probe_intensity, Image};
pub use integrator::{threads_from_env, PrimaryHit, THREADS_ENV};
pub use material::{Bsdf, BsdfSample};
pub use settings::RenderSettings;

use crate::geometry::Scene;

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("invalid scene: {0}")]
    SceneInvalid(String),
    #[error("render produced a non-finite pixel")]
    ImageNaN,
    #[error("probe: {0}")]
    Probe(String),
    #[error("output: {0}")]
    Output(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Compiles and renders `scene` with the default thread count.
pub fn render(scene: &Scene) -> Result<Image, RenderError> {
    RenderScene::build(scene)?.render()
}
