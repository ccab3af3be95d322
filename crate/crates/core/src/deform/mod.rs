//! Approximate gel indentation and constitutive energy evaluators.

mod energy;
mod indent;
mod mirror;
mod settings;

pub use energy::{
    linear_elastic_energy, linear_elastic_gradient, neo_hookean_energy, neo_hookean_gradient,
    ogden_energy, ogden_gradient, strain_energy, strain_energy_gradient, ConstitutiveParams,
};
pub use indent::{
    cotangent_neighbours, imprint_width, indent_pad, indent_surface, width_direction, IndentReport,
    APPROXIMATE_SOURCE, EXTERNAL_SOURCE,
};
pub use mirror::{bow_arc_length, bow_offset, deform_mirror};
pub use settings::{DeformSettings, ProjectionMode};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeformError {
    #[error("stretches must be positive, got {0:?}")]
    NonPositiveStretch([f64; 3]),
    #[error("parameters are not for the {0} model")]
    WrongModel(&'static str),
    #[error("invalid constitutive parameters: {0}")]
    InvalidParams(String),
    #[error("invalid deform settings: {0}")]
    InvalidSettings(String),
    #[error("indenter covers {:.0}% of the surface vertices", fraction * 100.0)]
    IndenterSwallowsMesh { fraction: f64 },
    #[error("indenter never reaches the surface along the approach direction")]
    NoContact,
}
