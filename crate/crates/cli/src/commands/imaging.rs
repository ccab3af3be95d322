use std::path::{Path, PathBuf};

use clap::Args;
use finray_core::geometry::{FingerLayout, LedPlacement, Scene, DEFAULT_TOP_TILT};
use finray_core::render::{masked_stats, probe_intensity, Image, RenderScene};
use finray_core::svg::{Plot, Series, SeriesStyle};
use serde::Serialize;
use serde_json::json;

use crate::commands::mesh::write_with;
use crate::manifest::{write_atomic, Manifest};
use crate::{CliError, Global, Result};

/// Angles used when `--angles` is not given (degrees).
pub fn default_angle_grid() -> Vec<f64> {
    (1..=15).map(|k| 10.0 * k as f64).collect()
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// Output file stem.
    #[arg(long, default_value = "render")]
    pub name: String,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Comma-separated bottom-light tilts in degrees (default 10..=150 step 10).
    #[arg(long, value_delimiter = ',')]
    pub angles: Option<Vec<f64>>,
    /// Probe pixel x,y; defaults to the pixel showing the indenter point.
    #[arg(long, value_delimiter = ',')]
    pub probe: Option<Vec<u32>>,
    /// Probe window edge in pixels (odd).
    #[arg(long)]
    pub window: Option<u32>,
    /// Skip the per-angle PNG and raw images.
    #[arg(long)]
    pub no_images: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// One-light scene file. Defaults to the base scene without top panels.
    #[arg(long)]
    pub one: Option<PathBuf>,
    /// Two-light scene file. Defaults to the one-light scene plus a top panel.
    #[arg(long)]
    pub two: Option<PathBuf>,
    /// Radiant scale of the generated top panel.
    #[arg(long, default_value_t = 1.0)]
    pub top_scale: f64,
}

fn scene_label(g: &Global) -> String {
    g.scene
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "default".into())
}

fn write_image(dir: &Path, stem: &str, img: &Image, m: &mut Manifest) -> Result<()> {
    let png = format!("{stem}.png");
    let raw = format!("{stem}.rgbf");
    img.write_png(&dir.join(&png))?;
    write_with(&dir.join(&raw), |b| Ok(img.write_raw(b)?))?;
    m.record(dir, &png)?;
    m.record(dir, &raw)?;
    Ok(())
}

pub fn render(g: &Global, a: &RenderArgs) -> Result<()> {
    let scene = g.load_scene()?;
    let rs = RenderScene::build(&scene)?;
    let img = rs.render()?;
    let dir = g.out_dir()?;
    let mut m = Manifest::new(
        "render",
        json!({ "scene": scene_label(g), "scene_toml": scene.to_toml()? }),
    )?
    .with_render(&scene.render);
    m.deformation_source = rs.deformation_source.clone();
    write_image(dir, &a.name, &img, &mut m)?;
    if scene.probe.is_some() {
        let (x, y, w) = rs.probe_pixel()?;
        let v = probe_intensity(&img, x, y, w)?;
        m.notes
            .push(format!("probe ({x}, {y}) window {w}: {v:.6e}"));
        println!("probe ({x}, {y}) window {w}: {v:.6e}");
    }
    println!(
        "{}x{} at {} spp, mean luminance {:.6e}",
        img.width,
        img.height,
        scene.render.samples_per_pixel,
        img.mean_luminance()
    );
    m.write(dir)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    angle_deg: f64,
    probe_intensity: f64,
}

fn write_sweep_csv(dir: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(&dir.join("sweep_angle.csv"), &bytes)
}

fn write_sweep_plot(dir: &Path, rows: &[SweepRow]) -> Result<()> {
    let pts = rows
        .iter()
        .map(|r| (r.angle_deg, r.probe_intensity))
        .collect();
    let plot = Plot::new(
        "Probe intensity vs bottom light angle",
        "angle (deg)",
        "intensity",
    )
    .with_series(Series::new(
        "probe",
        pts,
        SeriesStyle::LineAndMarkers,
        "#d62728",
    ));
    write_atomic(
        &dir.join("sweep_angle.svg"),
        plot.to_svg(640.0, 420.0).as_bytes(),
    )
}

pub fn sweep_angle(g: &Global, a: &SweepArgs) -> Result<()> {
    let default_grid = a.angles.is_none();
    let mut angles = a.angles.clone().unwrap_or_else(default_angle_grid);
    if angles.len() < 2 {
        return Err(CliError::Validation(
            "a sweep needs at least two angles".into(),
        ));
    }
    if let Some(bad) = angles.iter().find(|t| !(0.0..180.0).contains(*t)) {
        return Err(CliError::Validation(format!(
            "angle {bad} outside [0, 180)"
        )));
    }
    angles.sort_by(f64::total_cmp);

    let scene = g.load_scene()?;
    if scene.panels(LedPlacement::Bottom).next().is_none() {
        return Err(CliError::Validation(
            "scene has no bottom light to sweep".into(),
        ));
    }
    let rs = RenderScene::build(&scene)?;
    let (px, py, window) = match &a.probe {
        Some(p) => {
            let [x, y] = p[..] else {
                return Err(CliError::Usage("--probe expects x,y".into()));
            };
            let w = a
                .window
                .or(scene.probe.map(|p| p.window as u32))
                .unwrap_or(9);
            (x, y, w)
        }
        None => {
            let (x, y, w) = rs.probe_pixel()?;
            (x, y, a.window.unwrap_or(w))
        }
    };
    let dir = g.out_dir()?;
    let mut m = Manifest::new(
        "sweep-angle",
        json!({
            "scene": scene_label(g),
            "scene_toml": scene.to_toml()?,
            "variable": "light_angle",
            "values": angles,
            "angle_grid_default": default_grid,
            "probe": [px, py],
            "window": window,
        }),
    )?
    .with_render(&scene.render);
    m.deformation_source = rs.deformation_source.clone();
    if default_grid {
        m.notes.push(
            "angle grid 10..150 deg step 10 is a default choice; no sampling was prescribed".into(),
        );
    }

    let mut rows = Vec::with_capacity(angles.len());
    let mut failure = None;
    for (i, &angle) in angles.iter().enumerate() {
        let mut step = || -> Result<f64> {
            let mut s = scene.clone();
            s.set_bottom_tilt(angle);
            let img = rs.with_lights(&s.led_panels)?.render()?;
            if !a.no_images {
                write_image(dir, &format!("angle_{i:02}_{angle:05.1}"), &img, &mut m)?;
            }
            Ok(probe_intensity(&img, px, py, window)?)
        };
        match step() {
            Ok(v) => {
                log::info!("angle {angle}: {v:.6e}");
                rows.push(SweepRow {
                    angle_deg: angle,
                    probe_intensity: v,
                });
            }
            Err(e) => {
                failure = Some(e.in_stage(&format!("angle {angle}")));
                break;
            }
        }
    }

    write_sweep_csv(dir, &rows)?;
    write_sweep_plot(dir, &rows)?;
    m.record(dir, "sweep_angle.csv")?;
    m.record(dir, "sweep_angle.svg")?;
    for r in &rows {
        println!("{:6.1} {:.6e}", r.angle_deg, r.probe_intensity);
    }
    if let Some(e) = failure {
        m.partial = true;
        m.error = Some(e.to_string());
        m.write(dir)?;
        return Err(e);
    }
    m.write(dir)?;
    Ok(())
}

/// The base scene with top panels removed, and the same scene with one top
/// panel added (or the base unchanged if it already has one).
fn default_pair(base: &Scene, top_scale: f64) -> Result<(Scene, Scene)> {
    let mut one = base.clone();
    one.led_panels.retain(|p| p.placement != LedPlacement::Top);
    if base.panels(LedPlacement::Top).next().is_some() {
        let mut two = base.clone();
        for p in two
            .led_panels
            .iter_mut()
            .filter(|p| p.placement == LedPlacement::Top)
        {
            p.radiant_scale = top_scale;
        }
        return Ok((one, two));
    }
    let gel = base
        .gel
        .as_ref()
        .ok_or_else(|| CliError::Validation("scene has no gel pad".into()))?;
    let mut two = one.clone();
    two.led_panels
        .push(FingerLayout::for_pad(&gel.pad).top_panel(DEFAULT_TOP_TILT, top_scale));
    Ok((one, two))
}

#[derive(Debug, Serialize)]
pub struct UniformityReport {
    pub mean_one: f64,
    pub cv_one: f64,
    pub mean_two: f64,
    pub cv_two: f64,
    /// cv_two / cv_one.
    pub ratio: f64,
    pub mask_pixels: usize,
}

pub fn compare_lights(g: &Global, a: &CompareArgs) -> Result<()> {
    let load = |p: &PathBuf| -> Result<Scene> {
        let mut s = Scene::load(p)?;
        g.apply(&mut s);
        s.validate()?;
        Ok(s)
    };
    let (one, two) = match (&a.one, &a.two) {
        (Some(p1), Some(p2)) => (load(p1)?, load(p2)?),
        (None, None) => default_pair(&g.load_scene()?, a.top_scale)?,
        _ => {
            return Err(CliError::Usage(
                "give both --one and --two, or neither".into(),
            ))
        }
    };
    let strip_top = |s: &Scene| {
        let mut s = s.clone();
        s.led_panels.retain(|p| p.placement != LedPlacement::Top);
        s
    };
    if strip_top(&one) != strip_top(&two) {
        return Err(CliError::Validation(
            "scenes must be identical apart from the top panels".into(),
        ));
    }
    let rs_one = RenderScene::build(&one)?;
    let rs_two = RenderScene::build(&two)?;
    let mask = rs_one.gel_mask();
    if mask != rs_two.gel_mask() {
        return Err(CliError::Validation(
            "region-mask mismatch between the two scenes".into(),
        ));
    }
    let img_one = rs_one.render()?;
    let img_two = rs_two.render()?;
    let (mean_one, cv_one) = masked_stats(&img_one, &mask)?;
    let (mean_two, cv_two) = masked_stats(&img_two, &mask)?;
    let report = UniformityReport {
        mean_one,
        cv_one,
        mean_two,
        cv_two,
        ratio: cv_two / cv_one,
        mask_pixels: mask.iter().filter(|&&b| b).count(),
    };

    let dir = g.out_dir()?;
    let mut m = Manifest::new(
        "compare-lights",
        json!({
            "one": a.one.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| scene_label(g)),
            "two": a.two.as_ref().map(|p| p.display().to_string()),
            "top_scale": a.top_scale,
            "one_toml": one.to_toml()?,
            "two_toml": two.to_toml()?,
        }),
    )?
    .with_render(&one.render);
    m.deformation_source = rs_one.deformation_source.clone();
    write_image(dir, "lights_one", &img_one, &mut m)?;
    write_image(dir, "lights_two", &img_two, &mut m)?;
    let text =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(&dir.join("uniformity.json"), text.as_bytes())?;
    m.record(dir, "uniformity.json")?;
    m.write(dir)?;
    println!(
        "one light: mean {:.4e} cv {:.4}\ntwo lights: mean {:.4e} cv {:.4}\nratio {:.4}",
        report.mean_one, report.cv_one, report.mean_two, report.cv_two, report.ratio
    );
    Ok(())
}
