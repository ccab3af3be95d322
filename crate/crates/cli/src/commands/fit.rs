use std::path::PathBuf;

use clap::Args;
use finray_core::spectra::{
    fit_emission_with_shift, fit_plot, fit_points, read_measured_csv, write_fit_report, FitOptions,
    FluorescentMaterial, PaintPreset, SkewCauchyParams,
};
use serde::Serialize;

use crate::manifest::{write_atomic, Manifest};
use crate::{CliError, Global, Result};

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// Measured emission CSV with header `wavelength_nm,value`.
    pub measured: PathBuf,
    /// Paint preset whose absorption lobe and base reflectance are kept.
    #[arg(long, default_value = "red")]
    pub paint: String,
    /// Pin the emission peak to the preset's absorption peak plus Stokes shift.
    #[arg(long)]
    pub fixed_shift: bool,
}

pub fn run(g: &Global, a: &FitArgs) -> Result<()> {
    let preset: PaintPreset = a.paint.parse()?;
    let file = std::fs::File::open(&a.measured)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.measured.display())))?;
    let measured = read_measured_csv(std::io::BufReader::new(file))?;
    let points = &measured.points;
    let base = preset.material();
    let init = SkewCauchyParams::initial_guess(points)?;
    let opts = FitOptions::default();
    let report = if a.fixed_shift {
        fit_emission_with_shift(points, &base.absorption, preset.stokes_shift(), init, &opts)?
    } else {
        fit_points(points, init, &opts)?
    };
    if !report.converged {
        log::warn!(
            "fit stopped after {} iterations without converging",
            report.iterations
        );
    }
    let fitted = FluorescentMaterial::new(
        base.absorption,
        report.params,
        base.conversion_efficiency,
        base.base_reflectance.clone(),
    )?;

    let dir = g.out_dir()?;
    let stem = format!("fit_{preset}");
    let mut csv = Vec::new();
    write_fit_report(&mut csv, points, &report)?;
    write_atomic(&dir.join(format!("{stem}.csv")), &csv)?;
    let color = match preset {
        PaintPreset::Red => "#d62728",
        PaintPreset::Green => "#2ca02c",
    };
    let svg =
        fit_plot(&format!("{preset} paint emission"), points, &report, color).to_svg(640.0, 420.0);
    write_atomic(&dir.join(format!("{stem}.svg")), svg.as_bytes())?;
    let preset_json =
        serde_json::to_string_pretty(&fitted).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(
        &dir.join(format!("paint_{preset}.json")),
        preset_json.as_bytes(),
    )?;

    println!(
        "{preset}: {} rms={:.3e} iterations={} converged={}",
        report.params,
        report.rms(points.len()),
        report.iterations,
        report.converged
    );
    let mut m = Manifest::new("fit", a)?;
    m.notes.push(format!("residual {:.6e}", report.residual));
    for name in [
        format!("{stem}.csv"),
        format!("{stem}.svg"),
        format!("paint_{preset}.json"),
    ] {
        m.record(dir, &name)?;
    }
    m.write(dir)?;
    Ok(())
}
