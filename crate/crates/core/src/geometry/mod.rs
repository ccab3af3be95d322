//! Gel-pad generation, indenters and sensor scene assembly.

mod indenter;
mod pad;
mod scene;

pub use indenter::{make_indenter, Indenter, IndenterKind};
pub use pad::{generate_gelpad, GelPad, GelPadSpec, PadFamily, PadSize, DEFAULT_ELEMENT_SIZE};
pub use scene::{
    assemble_scene, default_indenter, default_materials, default_scene, furnace_scene, is_flat,
    preset_scene, side_wall_rect, Camera, FingerLayout, GelSource, GelSpec, IndenterPlacement,
    LedPanel, LedPlacement, MaterialSpec, MirrorSpec, ObjectShape, PaintStrip, ProbeSpec, Rect,
    Scene, SceneObject, StripSide, DEFAULT_BOTTOM_TILT, DEFAULT_TOP_TILT, GEL_MATERIAL,
    GREEN_PAINT_MATERIAL, MIRROR_MATERIAL, PRESET_EXPOSURE, RED_PAINT_MATERIAL, SCHEMA_VERSION,
};

use crate::meshconvert::MeshError;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("patch does not fit: {0}")]
    PatchDoesNotFit(String),
    #[error("inconsistent materials: {0}")]
    InconsistentMaterials(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("scene file: {0}")]
    Format(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
