use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::Args;
use finray_core::deform::{indent_pad, APPROXIMATE_SOURCE, EXTERNAL_SOURCE};
use finray_core::geometry::{
    assemble_scene, default_materials, generate_gelpad, FingerLayout, GelPadSpec, GelSource,
    IndenterPlacement, DEFAULT_BOTTOM_TILT, DEFAULT_TOP_TILT,
};
use finray_core::meshconvert::{hex_to_surface, read_neutral, Strictness};
use finray_core::render::{probe_intensity, RenderScene, RenderSettings};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::commands::mesh::{neutral_bytes, pad_for, write_with};
use crate::manifest::{write_atomic, Manifest};
use crate::{CliError, Global, IndenterArgs, PadArgs, Result};

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub pad: PadArgs,
    #[command(flatten)]
    pub indenter: IndenterArgs,
    /// Deformed hex mesh in the neutral format from an external solver; it
    /// replaces the approximate deformer.
    #[arg(long)]
    pub external: Option<PathBuf>,
    /// 1 for the bottom light only, 2 to add the top light.
    #[arg(long, default_value_t = 1)]
    pub lights: u32,
    /// Bottom light tilt in degrees.
    #[arg(long, default_value_t = DEFAULT_BOTTOM_TILT)]
    pub bottom_tilt: f64,
    /// Re-run with the inputs recorded in a pipeline manifest.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
}

/// Everything a pipeline run depends on; stored in its manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub pad: GelPadSpec,
    pub indenter: IndenterPlacement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<PathBuf>,
    pub lights: u32,
    pub bottom_tilt: f64,
    pub render: RenderSettings,
}

/// Layers through the thickness when the pad spec leaves it open. Only the
/// sensing face is rendered, so a coarse column keeps the files small.
const PIPELINE_LAYERS: usize = 3;

fn spec_from_args(g: &Global, a: &PipelineArgs) -> Result<PipelineSpec> {
    let mut pad = pad_for(g, &a.pad)?;
    if pad.layers.is_none() {
        pad.layers = Some(PIPELINE_LAYERS);
    }
    // Scene file settings (or the preset ones) plus the command-line overrides.
    let render = g.load_scene()?.render;
    Ok(PipelineSpec {
        pad,
        indenter: a.indenter.resolve(&pad)?,
        external: a.external.clone(),
        lights: a.lights,
        bottom_tilt: a.bottom_tilt,
        render,
    })
}

fn spec_from_manifest(path: &Path) -> Result<PipelineSpec> {
    let m = Manifest::load(path)?;
    if m.command != "pipeline" {
        return Err(CliError::Usage(format!(
            "{} is a `{}` manifest",
            path.display(),
            m.command
        )));
    }
    let spec = m
        .inputs
        .get("spec")
        .cloned()
        .ok_or_else(|| CliError::Usage("manifest has no pipeline spec".into()))?;
    Ok(serde_json::from_value(spec)?)
}

pub fn run(g: &Global, a: &PipelineArgs) -> Result<()> {
    let spec = match &a.from_manifest {
        Some(p) => spec_from_manifest(p)?,
        None => spec_from_args(g, a)?,
    };
    if !(1..=2).contains(&spec.lights) {
        return Err(CliError::Validation(format!(
            "--lights must be 1 or 2, got {}",
            spec.lights
        )));
    }
    let dir = g.out_dir()?;
    let mut stages = Vec::new();

    let pad = generate_gelpad(&spec.pad).map_err(|e| CliError::from(e).in_stage("generate"))?;
    write_atomic(&dir.join("pad.neutral"), &neutral_bytes(&pad.hex, None)?)?;
    stages.push(json!({
        "stage": "generate",
        "nodes": pad.hex.nodes.len(),
        "hexes": pad.hex.elements.len(),
        "output": "pad.neutral",
    }));

    let (deformed, source) = match &spec.external {
        Some(path) => {
            let file = std::fs::File::open(path)
                .map_err(|e| CliError::Usage(format!("deform: {}: {e}", path.display())))?;
            let nm = read_neutral(BufReader::new(file))
                .map_err(|e| CliError::from(e).in_stage("deform"))?;
            let source = nm.source.unwrap_or_else(|| EXTERNAL_SOURCE.to_string());
            (nm.mesh, source)
        }
        None => {
            let ind = &spec.indenter;
            let (hex, _, report) =
                indent_pad(&pad, &ind.shape, ind.approach, ind.depth, &ind.settings)
                    .map_err(|e| CliError::from(e).in_stage("deform"))?;
            stages.push(json!({
                "stage": "indent",
                "travel": report.travel,
                "max_displacement": report.max_displacement,
                "imprint_width": report.imprint_width,
            }));
            (hex, APPROXIMATE_SOURCE.to_string())
        }
    };
    write_atomic(
        &dir.join("deformed.neutral"),
        &neutral_bytes(&deformed, Some(&source))?,
    )?;
    stages.push(json!({ "stage": "deform", "source": source, "output": "deformed.neutral" }));

    let moved = deformed
        .apply_displacements()
        .map_err(|e| CliError::from(e).in_stage("convert"))?;
    let (surface, orient) = hex_to_surface(&moved, Strictness::Repair)
        .map_err(|e| CliError::from(e).in_stage("convert"))?;
    write_with(&dir.join("gel_surface.obj"), |b| {
        Ok(surface.mesh.write_obj(b)?)
    })?;
    stages.push(json!({
        "stage": "convert",
        "triangles": surface.mesh.triangles.len(),
        "watertight": surface.mesh.is_watertight(),
        "rewound": orient.rewound,
        "repaired": orient.repaired,
        "output": "gel_surface.obj",
    }));

    let layout = FingerLayout::for_pad(&spec.pad);
    let mut lights = vec![layout.bottom_panel(spec.bottom_tilt, 1.0)];
    if spec.lights == 2 {
        lights.push(layout.top_panel(DEFAULT_TOP_TILT, 1.0));
    }
    let mut scene = assemble_scene(&spec.pad, lights, Some(spec.indenter), default_materials())
        .map_err(|e| CliError::from(e).in_stage("render"))?;
    scene.render = spec.render;
    if let Some(gel) = scene.gel.as_mut() {
        gel.source = GelSource::NeutralMesh {
            path: dir.join("deformed.neutral"),
        };
    }
    let rs = RenderScene::build(&scene).map_err(|e| CliError::from(e).in_stage("render"))?;
    let img = rs
        .render()
        .map_err(|e| CliError::from(e).in_stage("render"))?;
    img.write_png(&dir.join("final.png"))?;
    write_with(&dir.join("final.rgbf"), |b| Ok(img.write_raw(b)?))?;
    let (px, py, w) = rs
        .probe_pixel()
        .map_err(|e| CliError::from(e).in_stage("render"))?;
    let probe = probe_intensity(&img, px, py, w)?;
    stages.push(json!({
        "stage": "render",
        "triangles": rs.triangle_count(),
        "probe": [px, py],
        "window": w,
        "probe_intensity": probe,
        "output": "final.png",
    }));

    let mut m = Manifest::new("pipeline", json!({ "spec": spec, "stages": stages }))?
        .with_render(&spec.render);
    m.deformation_source = rs.deformation_source.clone().or(Some(source));
    for name in [
        "pad.neutral",
        "deformed.neutral",
        "gel_surface.obj",
        "final.png",
        "final.rgbf",
    ] {
        m.record(dir, name)?;
    }
    let path = m.write(dir)?;
    println!(
        "pipeline done ({}), probe {probe:.6e}; manifest {}",
        m.deformation_source.as_deref().unwrap_or("undeformed"),
        path.display()
    );
    Ok(())
}
