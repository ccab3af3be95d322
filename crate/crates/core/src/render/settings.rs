use serde::{Deserialize, Serialize};

use super::RenderError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSettings {
    pub samples_per_pixel: u32,
    pub max_depth: u32,
    pub rr_start_depth: u32,
    pub seed: u64,
    pub exposure: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            samples_per_pixel: 64,
            max_depth: 6,
            rr_start_depth: 3,
            seed: 1,
            exposure: 1.0,
            width: 320,
            height: 240,
        }
    }
}

impl RenderSettings {
    pub fn validate(&self) -> Result<(), RenderError> {
        let bad = |m: &str| Err(RenderError::SceneInvalid(m.to_string()));
        if self.samples_per_pixel < 1 {
            return bad("samples_per_pixel must be at least 1");
        }
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1");
        }
        if self.width < 1 || self.height < 1 {
            return bad("image dimensions must be positive");
        }
        if !(self.exposure.is_finite() && self.exposure > 0.0) {
            return bad("exposure must be positive");
        }
        Ok(())
    }
}
