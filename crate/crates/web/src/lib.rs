//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each export has a plain Rust twin returning `Result<_, String>` so the
//! logic can be tested natively.

use finray_core::geometry::{preset_scene, GelPadSpec, PadSize};
use finray_core::render::RenderScene;
use finray_core::spectra::{
    fit_plot, fit_points, read_measured_csv, FitOptions, PaintPreset, SkewCauchyParams,
};
use finray_core::svg::{Plot, Series, SeriesStyle};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest render the page may request, in pixels.
pub const MAX_PIXELS: u32 = 320 * 240;

#[derive(Debug, Serialize)]
pub struct FitResult {
    pub lambda0: f64,
    pub gamma: f64,
    pub omega: f64,
    pub h: f64,
    pub rms: f64,
    pub iterations: usize,
    pub converged: bool,
    pub svg: String,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Fits the emission model to `wavelength_nm,value` CSV text.
pub fn fit_csv(text: &str, paint: &str) -> Result<FitResult, String> {
    let preset: PaintPreset = paint.parse().map_err(err)?;
    let measured = read_measured_csv(text.as_bytes()).map_err(err)?;
    let pts = &measured.points;
    let init = SkewCauchyParams::initial_guess(pts).map_err(err)?;
    let report = fit_points(pts, init, &FitOptions::default()).map_err(err)?;
    let color = match preset {
        PaintPreset::Red => "#d62728",
        PaintPreset::Green => "#2ca02c",
    };
    let svg =
        fit_plot(&format!("{preset} paint emission"), pts, &report, color).to_svg(560.0, 360.0);
    let p = report.params;
    Ok(FitResult {
        lambda0: p.lambda0,
        gamma: p.gamma,
        omega: p.omega,
        h: p.h,
        rms: report.rms(pts.len()),
        iterations: report.iterations,
        converged: report.converged,
        svg,
    })
}

/// Samples a model spectrum as CSV text, for seeding the fit box.
pub fn model_csv(lambda0: f64, gamma: f64, omega: f64, peak: f64) -> Result<String, String> {
    let p = SkewCauchyParams::with_peak_value(lambda0, gamma, omega, peak).map_err(err)?;
    let mut out = String::from("wavelength_nm,value\n");
    for i in 0..=68 {
        let l = 380.0 + 5.0 * i as f64;
        out.push_str(&format!("{l},{:.6}\n", p.eval(l)));
    }
    Ok(out)
}

fn pad(size: &str, family: &str, variant: usize) -> Result<GelPadSpec, String> {
    let size: PadSize = size.parse().map_err(err)?;
    GelPadSpec::preset(size, family, variant).map_err(err)
}

/// SVG of the sensing-face height across the pad width.
pub fn pad_section(size: &str, family: &str, variant: usize) -> Result<String, String> {
    let spec = pad(size, family, variant)?;
    let plot = Plot::new(
        &format!(
            "{} pad, {} x {} mm",
            spec.family_name(),
            spec.width,
            spec.length
        ),
        "x (mm)",
        "z (mm)",
    )
    .with_series(Series::new(
        "sensing face",
        spec.cross_section(121),
        SeriesStyle::Line,
        "#1f77b4",
    ));
    Ok(plot.to_svg(560.0, 280.0))
}

/// Renders the preset finger scene and returns RGBA8 pixels for a canvas.
pub fn render_rgba(
    size: &str,
    family: &str,
    bottom_tilt: f64,
    two_lights: bool,
    width: u32,
    height: u32,
    spp: u32,
) -> Result<Vec<u8>, String> {
    if width == 0 || height == 0 || width.saturating_mul(height) > MAX_PIXELS {
        return Err(format!(
            "image size {width}x{height} outside 1..={MAX_PIXELS} pixels"
        ));
    }
    let mut scene = preset_scene(&pad(size, family, 0)?, two_lights).map_err(err)?;
    scene.set_bottom_tilt(bottom_tilt);
    scene.render.width = width;
    scene.render.height = height;
    scene.render.samples_per_pixel = spp.max(1);
    scene.validate().map_err(err)?;
    let img = RenderScene::build(&scene)
        .and_then(|rs| rs.render_with_threads(Some(1)))
        .map_err(err)?;
    let rgb = img.to_srgb8();
    let mut rgba = Vec::with_capacity(rgb.len() / 3 * 4);
    for px in rgb.chunks_exact(3) {
        rgba.extend_from_slice(px);
        rgba.push(255);
    }
    Ok(rgba)
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// JSON `{lambda0, gamma, omega, h, rms, iterations, converged, svg}`.
#[wasm_bindgen(js_name = fitCsv)]
pub fn fit_csv_js(text: &str, paint: &str) -> Result<String, JsError> {
    let r = js(fit_csv(text, paint))?;
    Ok(serde_json::to_string(&r)?)
}

#[wasm_bindgen(js_name = modelCsv)]
pub fn model_csv_js(lambda0: f64, gamma: f64, omega: f64, peak: f64) -> Result<String, JsError> {
    js(model_csv(lambda0, gamma, omega, peak))
}

#[wasm_bindgen(js_name = padSection)]
pub fn pad_section_js(size: &str, family: &str, variant: usize) -> Result<String, JsError> {
    js(pad_section(size, family, variant))
}

#[wasm_bindgen(js_name = renderRgba)]
pub fn render_rgba_js(
    size: &str,
    family: &str,
    bottom_tilt: f64,
    two_lights: bool,
    width: u32,
    height: u32,
    spp: u32,
) -> Result<Vec<u8>, JsError> {
    js(render_rgba(
        size,
        family,
        bottom_tilt,
        two_lights,
        width,
        height,
        spp,
    ))
}
