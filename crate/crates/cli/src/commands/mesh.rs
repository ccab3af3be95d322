use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::Args;
use finray_core::deform::{indent_pad, APPROXIMATE_SOURCE};
use finray_core::geometry::{generate_gelpad, GelPadSpec, Scene};
use finray_core::meshconvert::{
    hex_to_surface, read_fem_deck, read_neutral, sensing_triangles, write_neutral, HexMesh,
    Strictness,
};
use finray_core::svg::{Plot, Series, SeriesStyle};
use serde::Serialize;
use serde_json::json;

use crate::manifest::{write_atomic, Manifest};
use crate::{CliError, Global, IndenterArgs, PadArgs, Result};

#[derive(Debug, Clone, Args)]
pub struct GenPadArgs {
    #[command(flatten)]
    pub pad: PadArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    /// Neutral hex mesh, or an FEM input deck (`.inp`).
    pub input: PathBuf,
    /// Flip the minority orientation class instead of failing on conflicts.
    #[arg(long)]
    pub repair: bool,
    /// Write only the sensing face.
    #[arg(long)]
    pub sensing_only: bool,
}

#[derive(Debug, Clone, Args)]
pub struct IndentArgs {
    #[command(flatten)]
    pub pad: PadArgs,
    #[command(flatten)]
    pub indenter: IndenterArgs,
}

/// Pad from the flags, else the `--scene` pad, else the default preset.
pub(crate) fn pad_for(g: &Global, pad: &PadArgs) -> Result<GelPadSpec> {
    let scene = match &g.scene {
        Some(p) => Some(Scene::load(p)?),
        None => None,
    };
    pad.resolve(
        scene
            .as_ref()
            .and_then(|s| s.gel.as_ref())
            .map(|gel| &gel.pad),
    )
}

pub(crate) fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_atomic(path, &buf)
}

pub(crate) fn neutral_bytes(hex: &HexMesh, source: Option<&str>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_neutral(hex, source, &mut buf)?;
    Ok(buf)
}

pub fn gen_pad(g: &Global, a: &GenPadArgs) -> Result<()> {
    let spec = pad_for(g, &a.pad)?;
    let pad = generate_gelpad(&spec)?;
    let dir = g.out_dir()?;
    write_atomic(&dir.join("pad.neutral"), &neutral_bytes(&pad.hex, None)?)?;
    write_with(&dir.join("pad_surface.obj"), |b| {
        Ok(pad.surface.mesh.write_obj(b)?)
    })?;
    let section = Plot::new(
        &format!("{} pad cross-section", spec.family_name()),
        "x (mm)",
        "z (mm)",
    )
    .with_series(Series::new(
        "sensing face",
        spec.cross_section(101),
        SeriesStyle::Line,
        "#1f77b4",
    ));
    write_atomic(
        &dir.join("pad_section.svg"),
        section.to_svg(640.0, 320.0).as_bytes(),
    )?;
    let (nu, nv, nt) = pad.cells;
    println!(
        "{} pad {}x{}x{:.2} mm: {} nodes, {} hexes ({nu}x{nv}x{nt}), {} surface triangles",
        spec.family_name(),
        spec.width,
        spec.length,
        spec.thickness,
        pad.hex.nodes.len(),
        pad.hex.elements.len(),
        pad.surface.mesh.triangles.len()
    );
    let mut m = Manifest::new("gen-pad", json!({ "pad": spec }))?;
    for name in ["pad.neutral", "pad_surface.obj", "pad_section.svg"] {
        m.record(dir, name)?;
    }
    m.write(dir)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ConvertReport {
    vertices: usize,
    triangles: usize,
    boundary_quads: usize,
    watertight: bool,
    euler_characteristic: i64,
    signed_volume: f64,
    element_volume: f64,
    rewound: usize,
    repaired: usize,
    sensing_triangles: usize,
    source: Option<String>,
}

/// Reads a neutral mesh or FEM deck, returning the mesh with displacements
/// applied and its provenance tag.
pub(crate) fn read_hex(path: &Path) -> Result<(HexMesh, Option<String>)> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let is_deck = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("inp"));
    let (hex, source) = if is_deck {
        (read_fem_deck(reader)?, None)
    } else {
        let nm = read_neutral(reader)?;
        (nm.mesh, nm.source)
    };
    if hex.displacements.is_some() {
        Ok((hex.apply_displacements()?, source))
    } else {
        Ok((hex, source))
    }
}

pub fn convert(g: &Global, a: &ConvertArgs) -> Result<()> {
    let (hex, source) = read_hex(&a.input)?;
    let strictness = if a.repair {
        Strictness::Repair
    } else {
        Strictness::Strict
    };
    let (surface, orient) = hex_to_surface(&hex, strictness)?;
    let sensing = sensing_triangles(&surface, &hex);
    let mesh = if a.sensing_only {
        if sensing.is_empty() {
            return Err(CliError::Validation("mesh has no sensing face".into()));
        }
        surface.mesh.submesh(&sensing).0
    } else {
        surface.mesh.clone()
    };
    let report = ConvertReport {
        vertices: mesh.used_vertex_count(),
        triangles: mesh.triangles.len(),
        boundary_quads: surface.mesh.triangles.len() / 2,
        watertight: surface.mesh.is_watertight(),
        euler_characteristic: surface.mesh.euler_characteristic(),
        signed_volume: surface.mesh.signed_volume(),
        element_volume: hex.total_volume(),
        rewound: orient.rewound,
        repaired: orient.repaired,
        sensing_triangles: sensing.len(),
        source,
    };
    let stem = a
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mesh".into());
    let dir = g.out_dir()?;
    let obj = format!("{stem}.obj");
    let rep = format!("{stem}_surface.json");
    write_with(&dir.join(&obj), |b| Ok(mesh.write_obj(b)?))?;
    let text =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(&dir.join(&rep), text.as_bytes())?;
    println!(
        "{} triangles, watertight={}, chi={}, volume {:.6} (elements {:.6})",
        report.triangles,
        report.watertight,
        report.euler_characteristic,
        report.signed_volume,
        report.element_volume
    );
    let mut m = Manifest::new(
        "convert",
        json!({ "input": a.input, "repair": a.repair, "sensing_only": a.sensing_only }),
    )?;
    m.deformation_source = report.source.clone();
    m.record(dir, &obj)?;
    m.record(dir, &rep)?;
    m.write(dir)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct IndentSummary {
    travel: f64,
    max_displacement: f64,
    imprint_width: f64,
    penetrating_vertices: usize,
    min_signed_distance: f64,
    source: &'static str,
}

pub fn indent(g: &Global, a: &IndentArgs) -> Result<()> {
    let spec = pad_for(g, &a.pad)?;
    let placement = a.indenter.resolve(&spec)?;
    let pad = generate_gelpad(&spec)?;
    let (hex, face, report) = indent_pad(
        &pad,
        &placement.shape,
        placement.approach,
        placement.depth,
        &placement.settings,
    )?;
    let min_sd = face
        .vertices
        .iter()
        .map(|v| report.indenter.signed_distance(v))
        .fold(f64::INFINITY, f64::min);
    let summary = IndentSummary {
        travel: report.travel,
        max_displacement: report.max_displacement,
        imprint_width: report.imprint_width,
        penetrating_vertices: report.penetrating_vertices,
        min_signed_distance: min_sd,
        source: report.source,
    };
    let dir = g.out_dir()?;
    write_atomic(
        &dir.join("indented.neutral"),
        &neutral_bytes(&hex, Some(APPROXIMATE_SOURCE))?,
    )?;
    write_with(&dir.join("indented_face.obj"), |b| Ok(face.write_obj(b)?))?;
    let text =
        serde_json::to_string_pretty(&summary).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(&dir.join("indent_report.json"), text.as_bytes())?;
    println!(
        "travel {:.4} mm, max displacement {:.4} mm, imprint width {:.3} mm, min signed distance {:.2e} mm",
        summary.travel, summary.max_displacement, summary.imprint_width, summary.min_signed_distance
    );
    let mut m = Manifest::new("indent", json!({ "pad": spec, "indenter": placement }))?;
    m.deformation_source = Some(APPROXIMATE_SOURCE.into());
    for name in [
        "indented.neutral",
        "indented_face.obj",
        "indent_report.json",
    ] {
        m.record(dir, name)?;
    }
    m.write(dir)?;
    Ok(())
}
