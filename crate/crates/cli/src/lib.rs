//! `finray` command-line front end: paint calibration fits, pad and mesh
//! tools, rendering and the illumination design sweeps.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use finray_core::deform::DeformError;
use finray_core::geometry::{default_scene, GeometryError, Scene};
use finray_core::meshconvert::MeshError;
use finray_core::render::RenderError;
use finray_core::spectra::SpectraError;

mod args;
pub mod commands;
pub mod manifest;

pub use args::{IndenterArgs, PadArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    /// 1 usage, 2 validation, 3 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    /// Prefixes the message with the stage that failed.
    pub fn in_stage(self, stage: &str) -> CliError {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{stage}: {m}")),
            CliError::Validation(m) => CliError::Validation(format!("{stage}: {m}")),
            CliError::Runtime(m) => CliError::Runtime(format!("{stage}: {m}")),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::Io(e) => CliError::Runtime(e.to_string()),
            GeometryError::Format(m) => CliError::Usage(m),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::SceneInvalid(_) | RenderError::Probe(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::Io(e) => CliError::Runtime(e.to_string()),
            MeshError::Parse { .. } => CliError::Usage(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Csv(_) => CliError::Usage(e.to_string()),
            SpectraError::NonConvergence(_) => CliError::Runtime(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<DeformError> for CliError {
    fn from(e: DeformError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "finray",
    version,
    about = "Forward design of fluorescent camera-based tactile fingers"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Render overrides apply on top of the
/// scene file.
#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Render seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Samples per pixel.
    #[arg(long, global = true)]
    pub spp: Option<u32>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Scene TOML file; the default flat-ellipsoid scene when absent.
    #[arg(long, global = true)]
    pub scene: Option<PathBuf>,
    /// Image width in pixels.
    #[arg(long, global = true)]
    pub width: Option<u32>,
    /// Image height in pixels.
    #[arg(long, global = true)]
    pub height: Option<u32>,
    /// Maximum path length in bounces.
    #[arg(long, global = true)]
    pub max_depth: Option<u32>,
    /// Linear scale applied before tone mapping.
    #[arg(long, global = true)]
    pub exposure: Option<f64>,
}

impl Global {
    /// Loads `--scene` (or the default scene) and applies the overrides.
    pub fn load_scene(&self) -> Result<Scene> {
        let mut scene = match &self.scene {
            Some(p) => Scene::load(p)?,
            None => default_scene(),
        };
        self.apply(&mut scene);
        scene.validate()?;
        Ok(scene)
    }

    pub fn apply(&self, scene: &mut Scene) {
        let r = &mut scene.render;
        if let Some(v) = self.seed {
            r.seed = v;
        }
        if let Some(v) = self.spp {
            r.samples_per_pixel = v;
        }
        if let Some(v) = self.width {
            r.width = v;
        }
        if let Some(v) = self.height {
            r.height = v;
        }
        if let Some(v) = self.max_depth {
            r.max_depth = v;
        }
        if let Some(v) = self.exposure {
            r.exposure = v;
        }
    }

    pub fn out_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", self.out_dir.display())))?;
        Ok(&self.out_dir)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a skew-Cauchy emission lobe to a measured paint spectrum.
    Fit(commands::fit::FitArgs),
    /// Generate a parametric gel pad as a hex mesh.
    GenPad(commands::mesh::GenPadArgs),
    /// Convert a hex mesh (neutral format or FEM deck) to a triangle surface.
    Convert(commands::mesh::ConvertArgs),
    /// Indent a generated pad with a rigid indenter.
    Indent(commands::mesh::IndentArgs),
    /// Render one image of the scene.
    Render(commands::imaging::RenderArgs),
    /// Sweep the bottom light's tilt and probe the intensity near the indenter.
    SweepAngle(commands::imaging::SweepArgs),
    /// Compare illumination uniformity of one- and two-light scenes.
    CompareLights(commands::imaging::CompareArgs),
    /// Generate, indent, convert and render in one provenance-tracked run.
    Pipeline(commands::pipeline::PipelineArgs),
}

pub fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::Fit(a) => commands::fit::run(g, &a),
        Command::GenPad(a) => commands::mesh::gen_pad(g, &a),
        Command::Convert(a) => commands::mesh::convert(g, &a),
        Command::Indent(a) => commands::mesh::indent(g, &a),
        Command::Render(a) => commands::imaging::render(g, &a),
        Command::SweepAngle(a) => commands::imaging::sweep_angle(g, &a),
        Command::CompareLights(a) => commands::imaging::compare_lights(g, &a),
        Command::Pipeline(a) => commands::pipeline::run(g, &a),
    }
}
