use serde::{Deserialize, Serialize};

use super::DeformError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    /// Push vertices along their inward surface normal.
    #[default]
    Normal,
    /// Push vertices along the indenter approach direction.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeformSettings {
    pub smoothing_iterations: usize,
    pub smoothing_weight: f64,
    /// Clearance kept between the surface and the indenter (mm).
    pub contact_margin: f64,
    pub projection_mode: ProjectionMode,
}

impl Default for DeformSettings {
    fn default() -> Self {
        Self {
            smoothing_iterations: 25,
            smoothing_weight: 0.5,
            contact_margin: 1e-6,
            projection_mode: ProjectionMode::Normal,
        }
    }
}

impl DeformSettings {
    pub fn validate(&self) -> Result<(), DeformError> {
        if !(0.0..=1.0).contains(&self.smoothing_weight) {
            return Err(DeformError::InvalidSettings(
                "smoothing_weight must lie in [0, 1]".into(),
            ));
        }
        if !(self.contact_margin >= 0.0 && self.contact_margin.is_finite()) {
            return Err(DeformError::InvalidSettings(
                "contact_margin must be non-negative".into(),
            ));
        }
        Ok(())
    }
}
