use clap::Args;
use finray_core::deform::DeformSettings;
use finray_core::geometry::{
    default_indenter, make_indenter, FingerLayout, GelPadSpec, IndenterKind, IndenterPlacement,
    PadSize,
};
use finray_core::math::{vec3, Vec3};

use crate::{CliError, Result};

pub(crate) fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [x, y, z] => Ok(vec3(x, y, z)),
        _ => Err(format!("expected x,y,z, got `{s}`")),
    }
}

/// Gel pad selection. With nothing set, commands fall back to the scene's pad.
#[derive(Debug, Clone, Default, Args)]
pub struct PadArgs {
    /// Size preset: baby, standard (35x70) or wide (60x50).
    #[arg(long)]
    pub size: Option<String>,
    /// Shape family: flat, cylindrical or ellipsoid.
    #[arg(long)]
    pub family: Option<String>,
    /// Curvature variant 0..=2 (0 is flattest).
    #[arg(long, default_value_t = 0)]
    pub variant: usize,
    /// Override the pad width (mm).
    #[arg(long)]
    pub pad_width: Option<f64>,
    /// Override the pad length (mm).
    #[arg(long)]
    pub pad_length: Option<f64>,
    /// Override the gel thickness (mm).
    #[arg(long)]
    pub thickness: Option<f64>,
    /// Surface cells across,along.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub resolution: Option<Vec<usize>>,
    /// Element layers through the thickness.
    #[arg(long)]
    pub layers: Option<usize>,
}

impl PadArgs {
    pub fn resolve(&self, fallback: Option<&GelPadSpec>) -> Result<GelPadSpec> {
        let mut spec = if self.size.is_some() || self.family.is_some() {
            let size: PadSize = self.size.as_deref().unwrap_or("standard").parse()?;
            GelPadSpec::preset(
                size,
                self.family.as_deref().unwrap_or("ellipsoid"),
                self.variant,
            )?
        } else if let Some(s) = fallback {
            *s
        } else {
            GelPadSpec::preset(PadSize::Standard, "ellipsoid", 0)?
        };
        if let Some(w) = self.pad_width {
            spec.width = w;
        }
        if let Some(l) = self.pad_length {
            spec.length = l;
        }
        if let Some(t) = self.thickness {
            spec.thickness = t;
        }
        if let Some(r) = &self.resolution {
            let [nu, nv] = r[..] else {
                return Err(CliError::Usage("--resolution expects two values".into()));
            };
            spec.resolution = Some([nu, nv]);
        }
        if let Some(n) = self.layers {
            spec.layers = Some(n);
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Args)]
pub struct IndenterArgs {
    /// cylinder, cuboid or sphere. Without it, a 20 mm cylinder lies across
    /// the pad at the layout's indenter position.
    #[arg(long)]
    pub indenter: Option<String>,
    /// radius,length for a cylinder; sx,sy,sz for a cuboid; radius for a sphere.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub dims: Option<Vec<f64>>,
    /// Starting centre x,y,z (mm); the indenter then moves along -z.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub center: Option<Vec3>,
    /// Cylinder axis x,y,z.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub axis: Option<Vec3>,
    /// Maximum penetration depth (mm).
    #[arg(long, default_value_t = 1.0)]
    pub depth: f64,
}

impl IndenterArgs {
    pub fn resolve(&self, pad: &GelPadSpec) -> Result<IndenterPlacement> {
        let mut placement = match &self.indenter {
            None => {
                if self.dims.is_some() {
                    return Err(CliError::Usage("--dims needs --indenter".into()));
                }
                default_indenter(pad, self.depth)
            }
            Some(kind) => {
                let kind: IndenterKind = kind.parse()?;
                let dims = self
                    .dims
                    .clone()
                    .ok_or_else(|| CliError::Usage("--indenter needs --dims".into()))?;
                let reach = dims.iter().fold(0.0_f64, |a, &b| a.max(b));
                let y = FingerLayout::for_pad(pad).indenter_y;
                let center = vec3(0.0, y, reach + 5.0);
                IndenterPlacement {
                    shape: make_indenter(kind, &dims, center, self.axis.unwrap_or_else(Vec3::x))?,
                    depth: self.depth,
                    approach: -Vec3::z(),
                    settings: DeformSettings::default(),
                }
            }
        };
        if let Some(c) = self.center {
            placement.shape = placement.shape.translated(c - placement.shape.center());
        }
        if !(self.depth >= 0.0 && self.depth.is_finite()) {
            return Err(CliError::Validation(format!(
                "depth {} must be non-negative",
                self.depth
            )));
        }
        Ok(placement)
    }
}
