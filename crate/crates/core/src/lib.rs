//! Forward-design simulation toolkit for fluorescent, camera-based tactile
//! sensor fingers.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`spectra`]: skew-Cauchy spectral lobes, paint calibration fits and
//!   spectrum → RGB conversion.
//! * [`geometry`]: parametric gel pads, rigid indenters and sensor scenes.
//! * [`meshconvert`]: hexahedral FEM meshes to oriented triangle surfaces.
//! * [`deform`]: an approximate indentation deformer plus analytic
//!   hyperelastic energy evaluators.
//! * [`render`]: a CPU path tracer with the emissive-texture approximation
//!   of fluorescent paint.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod color;
pub mod deform;
pub mod geometry;
pub mod math;
pub mod meshconvert;
pub mod render;
pub mod spectra;
pub mod svg;

pub use color::Rgb;
pub use math::Vec3;

/// Tool version recorded in provenance manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
