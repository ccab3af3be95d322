//! Spectral models for fluorescent paint calibration and light emission.
//!
//! Absorption and emission lobes use the four-parameter skew-Cauchy form
//!
//! ```text
//! f(λ | λ₀, γ, ω, h) = h / (γ² + (λ − λ₀)²) · ( atan(ω (λ − λ₀) / γ) / π + 1/2 )
//! ```
//!
//! Everything here is an immutable value type; all functions are pure.

mod fit;
mod io;
pub mod tables;

pub use fit::{
    fit_emission_with_shift, fit_paint_joint, fit_points, fit_spectrum, FitOptions, FitReport,
    PaintFit,
};
pub use io::{fit_plot, read_measured_csv, write_fit_report, MeasuredSpectrum};

use crate::color::Rgb;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

/// Central wavelengths of the eight calibration band-pass filters (nm).
pub const FILTER_WAVELENGTHS: [f64; 8] = [405.0, 450.0, 500.0, 532.0, 560.0, 600.0, 630.0, 660.0];

/// Excitation wavelength of the blue source used for calibration (nm).
pub const EXCITATION_WAVELENGTH: f64 = 450.0;

/// Default fluorescent conversion efficiency, the midpoint of 2–5 %.
pub const DEFAULT_CONVERSION_EFFICIENCY: f64 = 0.035;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("invalid spectral grid: {0}")]
    InvalidGrid(String),
    #[error("spectral grids differ")]
    GridMismatch,
    #[error("spectral sample {index} is negative or non-finite ({value})")]
    InvalidSample { index: usize, value: f64 },
    #[error("invalid skew-Cauchy parameters: {0}")]
    InvalidParams(String),
    #[error("invalid fluorescent material: {0}")]
    InvalidMaterial(String),
    #[error("measured spectrum is degenerate: {0}")]
    DegenerateInput(String),
    #[error("need at least {needed} measured samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("fit did not converge after {} iterations (residual {:.3e})", .0.iterations, .0.residual)]
    NonConvergence(Box<FitReport>),
    #[error("unknown paint preset `{0}` (expected `red` or `green`)")]
    UnknownPreset(String),
    #[error("measured spectrum CSV: {0}")]
    Csv(String),
}

/// Uniform wavelength grid `lambda_min..=lambda_max` in steps of `step` (nm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub step: f64,
}

impl SpectralGrid {
    /// 380–720 nm at 5 nm: 69 samples.
    pub const DEFAULT: SpectralGrid = SpectralGrid {
        lambda_min: 380.0,
        lambda_max: 720.0,
        step: 5.0,
    };

    pub fn new(lambda_min: f64, lambda_max: f64, step: f64) -> Result<Self, SpectraError> {
        if !(lambda_min.is_finite() && lambda_max.is_finite() && step.is_finite()) {
            return Err(SpectraError::InvalidGrid("non-finite bounds".into()));
        }
        if step <= 0.0 || lambda_max <= lambda_min {
            return Err(SpectraError::InvalidGrid(format!(
                "need lambda_min < lambda_max and step > 0, got {lambda_min}..{lambda_max} / {step}"
            )));
        }
        let n = (lambda_max - lambda_min) / step;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
            return Err(SpectraError::InvalidGrid(format!(
                "range {} is not a multiple of step {step}",
                lambda_max - lambda_min
            )));
        }
        Ok(Self {
            lambda_min,
            lambda_max,
            step,
        })
    }

    pub fn len(&self) -> usize {
        ((self.lambda_max - self.lambda_min) / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn wavelength(&self, i: usize) -> f64 {
        self.lambda_min + self.step * i as f64
    }

    pub fn wavelengths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.wavelength(i))
    }
}

impl Default for SpectralGrid {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Non-negative spectral samples on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum", into = "RawSpectrum")]
pub struct SampledSpectrum {
    grid: SpectralGrid,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSpectrum {
    lambda_min: f64,
    lambda_max: f64,
    step: f64,
    values: Vec<f64>,
}

impl TryFrom<RawSpectrum> for SampledSpectrum {
    type Error = SpectraError;
    fn try_from(r: RawSpectrum) -> Result<Self, SpectraError> {
        SampledSpectrum::new(
            SpectralGrid::new(r.lambda_min, r.lambda_max, r.step)?,
            r.values,
        )
    }
}

impl From<SampledSpectrum> for RawSpectrum {
    fn from(s: SampledSpectrum) -> Self {
        RawSpectrum {
            lambda_min: s.grid.lambda_min,
            lambda_max: s.grid.lambda_max,
            step: s.grid.step,
            values: s.values,
        }
    }
}

impl SampledSpectrum {
    pub fn new(grid: SpectralGrid, values: Vec<f64>) -> Result<Self, SpectraError> {
        if values.len() != grid.len() {
            return Err(SpectraError::InvalidGrid(format!(
                "grid has {} nodes but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(SpectraError::InvalidSample { index, value });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpectralGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: SpectralGrid, value: f64) -> Result<Self, SpectraError> {
        Self::new(grid, vec![value; grid.len()])
    }

    /// Samples `f` at every grid node; negative results are clamped to zero.
    pub fn from_fn(grid: SpectralGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.wavelengths().map(|l| f(l).max(0.0)).collect(),
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the largest sample (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// `(wavelength, value)` pairs.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.grid
            .wavelengths()
            .zip(self.values.iter().copied())
            .collect()
    }

    pub fn scaled(&self, k: f64) -> Result<Self, SpectraError> {
        Self::new(self.grid, self.values.iter().map(|v| v * k).collect())
    }

    /// Pointwise `a·self + b·other`.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self, SpectraError> {
        if self.grid != other.grid {
            return Err(SpectraError::GridMismatch);
        }
        Self::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }

    /// Pointwise product (e.g. reflectance × illuminant).
    pub fn product(&self, other: &Self) -> Result<Self, SpectraError> {
        if self.grid != other.grid {
            return Err(SpectraError::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x * y)
                .collect(),
        })
    }

    /// Riemann sum `Σ s(λ) Δλ`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.step
    }
}

/// One skew-Cauchy spectral lobe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewCauchyParams {
    /// Location parameter (nm); the curve's value there is `h / (2γ²)`.
    pub lambda0: f64,
    /// Width (nm).
    pub gamma: f64,
    /// Skewness; positive values lean the lobe towards longer wavelengths.
    pub omega: f64,
    /// Height (nm²), scaling the curve to unitless reflectance.
    pub h: f64,
}

pub const LAMBDA0_RANGE: (f64, f64) = (200.0, 1000.0);

impl SkewCauchyParams {
    pub fn new(lambda0: f64, gamma: f64, omega: f64, h: f64) -> Result<Self, SpectraError> {
        let p = Self {
            lambda0,
            gamma,
            omega,
            h,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters whose value at `lambda0` equals `peak`.
    pub fn with_peak_value(
        lambda0: f64,
        gamma: f64,
        omega: f64,
        peak: f64,
    ) -> Result<Self, SpectraError> {
        Self::new(lambda0, gamma, omega, 2.0 * gamma * gamma * peak)
    }

    pub fn validate(&self) -> Result<(), SpectraError> {
        let Self {
            lambda0,
            gamma,
            omega,
            h,
        } = *self;
        if ![lambda0, gamma, omega, h].iter().all(|v| v.is_finite()) {
            return Err(SpectraError::InvalidParams("non-finite value".into()));
        }
        if gamma <= 0.0 {
            return Err(SpectraError::InvalidParams(format!(
                "gamma must be > 0, got {gamma}"
            )));
        }
        if h <= 0.0 {
            return Err(SpectraError::InvalidParams(format!(
                "h must be > 0, got {h}"
            )));
        }
        if !(LAMBDA0_RANGE.0..=LAMBDA0_RANGE.1).contains(&lambda0) {
            return Err(SpectraError::InvalidParams(format!(
                "lambda0 {lambda0} nm outside [{}, {}]",
                LAMBDA0_RANGE.0, LAMBDA0_RANGE.1
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, lambda: f64) -> f64 {
        eval_skew_cauchy(self, lambda)
    }

    /// Partial derivatives `[∂f/∂λ₀, ∂f/∂γ, ∂f/∂ω, ∂f/∂h]` at `lambda`.
    pub fn gradient(&self, lambda: f64) -> [f64; 4] {
        let x = lambda - self.lambda0;
        let g = self.gamma;
        let d = g * g + x * x;
        let u = self.omega * x / g;
        let skew = u.atan() / PI + 0.5;
        let dskew_du = 1.0 / (PI * (1.0 + u * u));
        let df_dx = self.h * (-2.0 * x / (d * d) * skew + dskew_du * (self.omega / g) / d);
        let df_dgamma =
            self.h * (-2.0 * g / (d * d) * skew - dskew_du * (self.omega * x / (g * g)) / d);
        let df_domega = self.h / d * dskew_du * (x / g);
        [-df_dx, df_dgamma, df_domega, skew / d]
    }

    /// Wavelength of the curve's maximum (the lobe mode), found by golden
    /// section search within `λ₀ ± 3γ`. Equals `λ₀` when `ω = 0`.
    pub fn mode(&self) -> f64 {
        let (mut a, mut b) = (
            self.lambda0 - 3.0 * self.gamma,
            self.lambda0 + 3.0 * self.gamma,
        );
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if self.eval(c) > self.eval(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    /// Crude starting point for a fit: peak location, half-width at half
    /// maximum and peak height of the data, zero skew.
    pub fn initial_guess(points: &[(f64, f64)]) -> Result<Self, SpectraError> {
        let &(l0, peak) = points
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| SpectraError::DegenerateInput("no samples".into()))?;
        if peak <= 0.0 {
            return Err(SpectraError::DegenerateInput("no positive sample".into()));
        }
        let above: Vec<f64> = points
            .iter()
            .filter(|p| p.1 >= 0.5 * peak)
            .map(|p| p.0)
            .collect();
        let lo = above.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = above.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gamma = (0.5 * (hi - lo)).max(5.0);
        let lambda0 = l0.clamp(LAMBDA0_RANGE.0, LAMBDA0_RANGE.1);
        Self::with_peak_value(lambda0, gamma, 0.0, peak)
    }
}

impl fmt::Display for SkewCauchyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lambda0={:.6} gamma={:.6} omega={:.6} h={:.6}",
            self.lambda0, self.gamma, self.omega, self.h
        )
    }
}

/// Skew-Cauchy spectral value at `lambda`.
#[inline]
pub fn eval_skew_cauchy(p: &SkewCauchyParams, lambda: f64) -> f64 {
    let x = lambda - p.lambda0;
    p.h / (p.gamma * p.gamma + x * x) * ((p.omega * x / p.gamma).atan() / PI + 0.5)
}

/// Evaluates the lobe on every node of `grid`.
pub fn sample_model(p: &SkewCauchyParams, grid: &SpectralGrid) -> SampledSpectrum {
    SampledSpectrum::from_fn(*grid, |l| eval_skew_cauchy(p, l))
}

fn srgb_from_xyz(xyz: [f64; 3]) -> [f64; 3] {
    // IEC 61966-2-1 XYZ → linear sRGB (D65 white).
    const M: [[f64; 3]; 3] = [
        [3.2404542, -1.5371385, -0.4985314],
        [-0.9692660, 1.8760108, 0.0415560],
        [0.0556434, -0.2040259, 1.0572252],
    ];
    M.map(|row| row[0] * xyz[0] + row[1] * xyz[1] + row[2] * xyz[2])
}

fn unbalanced_rgb(values: &[f64], step: f64) -> [f64; 3] {
    let mut xyz = [0.0; 3];
    for (v, cmf) in values.iter().zip(tables::CIE1931_CMF.iter()) {
        for k in 0..3 {
            xyz[k] += v * cmf[k];
        }
    }
    srgb_from_xyz(xyz.map(|c| c * step))
}

fn white_balance() -> &'static [f64; 3] {
    static WB: OnceLock<[f64; 3]> = OnceLock::new();
    WB.get_or_init(|| unbalanced_rgb(&[1.0; 69], SpectralGrid::DEFAULT.step))
}

/// Linear RGB of a spectrum on the default grid.
///
/// Integrates against the CIE 1931 observer, converts to linear sRGB and
/// white-balances so that a constant spectrum of value `v` maps to
/// `(v, v, v)`. The map is linear; out-of-gamut spectra can produce
/// negative channels.
pub fn spectrum_to_rgb(s: &SampledSpectrum) -> Result<Rgb, SpectraError> {
    if *s.grid() != SpectralGrid::DEFAULT {
        return Err(SpectraError::GridMismatch);
    }
    let raw = unbalanced_rgb(s.values(), s.grid().step);
    let wb = white_balance();
    Ok(Rgb::new(raw[0] / wb[0], raw[1] / wb[1], raw[2] / wb[2]))
}

/// A fluorescent paint: absorption and re-emission lobes plus the
/// non-fluorescent diffuse reflectance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluorescentMaterial {
    pub absorption: SkewCauchyParams,
    pub emission: SkewCauchyParams,
    /// Emission λ₀ − absorption λ₀ (nm).
    pub stokes_shift: f64,
    pub conversion_efficiency: f64,
    pub base_reflectance: SampledSpectrum,
}

impl FluorescentMaterial {
    pub fn new(
        absorption: SkewCauchyParams,
        emission: SkewCauchyParams,
        conversion_efficiency: f64,
        base_reflectance: SampledSpectrum,
    ) -> Result<Self, SpectraError> {
        let m = Self {
            absorption,
            emission,
            stokes_shift: emission.lambda0 - absorption.lambda0,
            conversion_efficiency,
            base_reflectance,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), SpectraError> {
        self.absorption.validate()?;
        self.emission.validate()?;
        if !(self.stokes_shift > 0.0) {
            return Err(SpectraError::InvalidMaterial(format!(
                "Stokes shift must be positive, got {}",
                self.stokes_shift
            )));
        }
        let shift = self.emission.lambda0 - self.absorption.lambda0;
        if (shift - self.stokes_shift).abs() > 1e-9 {
            return Err(SpectraError::InvalidMaterial(format!(
                "emission λ₀ − absorption λ₀ = {shift} nm but stokes_shift = {}",
                self.stokes_shift
            )));
        }
        if !(0.0..=1.0).contains(&self.conversion_efficiency) {
            return Err(SpectraError::InvalidMaterial(format!(
                "conversion efficiency {} outside [0, 1]",
                self.conversion_efficiency
            )));
        }
        Ok(())
    }

    pub fn with_conversion_efficiency(mut self, eta: f64) -> Result<Self, SpectraError> {
        self.conversion_efficiency = eta;
        self.validate()?;
        Ok(self)
    }

    /// Fraction of a source spectrum absorbed by the paint: the overlap of
    /// the normalised source with the absorption lobe scaled to unit peak.
    pub fn absorbed_fraction(&self, source: &SampledSpectrum) -> f64 {
        let total: f64 = source.values().iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        let peak = self.absorption.eval(self.absorption.mode());
        let overlap: f64 = source
            .points()
            .iter()
            .map(|&(l, s)| s * self.absorption.eval(l) / peak)
            .sum();
        overlap / total
    }

    /// Emission colour: RGB of the sampled emission lobe, scaled to unit
    /// maximum channel.
    pub fn emission_color(&self) -> Rgb {
        let s = sample_model(&self.emission, &SpectralGrid::DEFAULT);
        spectrum_to_rgb(&s)
            .expect("default grid")
            .normalized_to_unit_max()
    }

    /// Diffuse albedo of the non-fluorescent component.
    pub fn base_albedo(&self) -> Rgb {
        spectrum_to_rgb(&self.base_reflectance)
            .map(|c| c.clamp(0.0, 1.0))
            .unwrap_or(Rgb::BLACK)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaintPreset {
    Red,
    Green,
}

impl FromStr for PaintPreset {
    type Err = SpectraError;
    fn from_str(s: &str) -> Result<Self, SpectraError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "red" => Ok(Self::Red),
            "green" => Ok(Self::Green),
            other => Err(SpectraError::UnknownPreset(other.to_string())),
        }
    }
}

impl fmt::Display for PaintPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Red => "red",
            Self::Green => "green",
        })
    }
}

impl PaintPreset {
    pub fn stokes_shift(self) -> f64 {
        match self {
            Self::Red => 100.0,
            Self::Green => 50.0,
        }
    }

    pub fn material(self) -> FluorescentMaterial {
        let shift = self.stokes_shift();
        let (abs, em, base) = match self {
            Self::Red => (
                SkewCauchyParams::with_peak_value(EXCITATION_WAVELENGTH, 40.0, 1.0, 1.0),
                SkewCauchyParams::with_peak_value(EXCITATION_WAVELENGTH + shift, 55.0, 5.0, 1.0),
                &tables::COLORCHECKER_RED,
            ),
            Self::Green => (
                SkewCauchyParams::with_peak_value(EXCITATION_WAVELENGTH, 25.0, 0.5, 1.0),
                SkewCauchyParams::with_peak_value(EXCITATION_WAVELENGTH + shift, 25.0, 3.0, 1.0),
                &tables::COLORCHECKER_GREEN,
            ),
        };
        let base = SampledSpectrum::new(SpectralGrid::DEFAULT, base.to_vec()).expect("tabulated");
        FluorescentMaterial::new(
            abs.expect("preset"),
            em.expect("preset"),
            DEFAULT_CONVERSION_EFFICIENCY,
            base,
        )
        .expect("preset material is valid")
    }
}

/// Built-in paint calibration by name (`red` or `green`).
pub fn make_paint_preset(name: &str) -> Result<FluorescentMaterial, SpectraError> {
    Ok(name.parse::<PaintPreset>()?.material())
}

/// Narrow-band blue LED emission centred on the excitation wavelength.
pub fn blue_led_spectrum() -> SampledSpectrum {
    let p =
        SkewCauchyParams::with_peak_value(EXCITATION_WAVELENGTH, 10.0, 0.0, 1.0).expect("valid");
    sample_model(&p, &SpectralGrid::DEFAULT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(l0: f64, g: f64, w: f64, h: f64) -> SkewCauchyParams {
        SkewCauchyParams::new(l0, g, w, h).unwrap()
    }

    #[test]
    fn value_at_lambda0() {
        assert_eq!(eval_skew_cauchy(&p(600.0, 10.0, 2.0, 200.0), 600.0), 1.0);
    }

    #[test]
    fn zero_skew_is_symmetric() {
        let q = p(600.0, 10.0, 0.0, 200.0);
        assert_eq!(q.eval(590.0), q.eval(610.0));
    }

    #[test]
    fn params_validation() {
        assert!(SkewCauchyParams::new(600.0, 0.0, 1.0, 1.0).is_err());
        assert!(SkewCauchyParams::new(600.0, 10.0, 1.0, -1.0).is_err());
        assert!(SkewCauchyParams::new(150.0, 10.0, 1.0, 1.0).is_err());
        assert!(SkewCauchyParams::new(f64::NAN, 10.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn default_grid_has_69_nodes() {
        assert_eq!(SpectralGrid::DEFAULT.len(), 69);
        assert_eq!(SpectralGrid::DEFAULT.wavelength(68), 720.0);
        assert!(SpectralGrid::new(380.0, 722.0, 5.0).is_err());
        assert!(SpectralGrid::new(380.0, 380.0, 5.0).is_err());
    }

    #[test]
    fn spectrum_rejects_negative_samples() {
        let mut v = vec![0.0; 69];
        v[3] = -1e-3;
        assert!(matches!(
            SampledSpectrum::new(SpectralGrid::DEFAULT, v),
            Err(SpectraError::InvalidSample { index: 3, .. })
        ));
    }

    #[test]
    fn symmetric_peak_lands_in_argmax_bin() {
        let q = p(552.0, 15.0, 0.0, 450.0);
        let s = sample_model(&q, &SpectralGrid::DEFAULT);
        let l = s.grid().wavelength(s.argmax());
        assert!((l - 552.0).abs() <= 2.5, "argmax at {l}");
    }

    #[test]
    fn sampled_model_matches_scalar_loop() {
        let q = p(550.0, 20.0, 1.0, 800.0);
        let s = sample_model(&q, &SpectralGrid::DEFAULT);
        let mut lambda = 380.0;
        for &v in s.values() {
            let x: f64 = lambda - 550.0;
            let direct = 800.0 / (400.0 + x * x) * ((x / 20.0).atan() / std::f64::consts::PI + 0.5);
            assert!((v - direct).abs() <= 1e-15 * direct.abs().max(1.0));
            lambda += 5.0;
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let q = p(560.0, 22.0, 1.7, 700.0);
        for lambda in [480.0, 540.0, 560.0, 575.0, 650.0] {
            let g = q.gradient(lambda);
            let bump = |i: usize, e: f64| {
                let mut a = [q.lambda0, q.gamma, q.omega, q.h];
                a[i] += e;
                eval_skew_cauchy(
                    &SkewCauchyParams {
                        lambda0: a[0],
                        gamma: a[1],
                        omega: a[2],
                        h: a[3],
                    },
                    lambda,
                )
            };
            for i in 0..4 {
                let e = 1e-5 * [q.lambda0, q.gamma, q.omega, q.h][i].abs().max(1.0);
                let fd = (bump(i, e) - bump(i, -e)) / (2.0 * e);
                assert!(
                    (fd - g[i]).abs() <= 1e-6 * fd.abs().max(1e-8),
                    "d{i} at {lambda}: {fd} vs {}",
                    g[i]
                );
            }
        }
    }

    #[test]
    fn mode_shifts_with_skew() {
        assert!((p(550.0, 20.0, 0.0, 1.0).mode() - 550.0).abs() < 1e-6);
        assert!(p(550.0, 20.0, 2.0, 1.0).mode() > 550.0);
        assert!(p(550.0, 20.0, -2.0, 1.0).mode() < 550.0);
    }

    #[test]
    fn flat_spectrum_is_white() {
        let rgb = spectrum_to_rgb(&SampledSpectrum::constant(SpectralGrid::DEFAULT, 0.7).unwrap())
            .unwrap();
        assert!(rgb.max_channel() / rgb.min_channel() < 1.05);
        assert!((rgb.g() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn zero_spectrum_is_black() {
        assert_eq!(
            spectrum_to_rgb(&SampledSpectrum::zeros(SpectralGrid::DEFAULT)).unwrap(),
            Rgb::BLACK
        );
    }

    #[test]
    fn rgb_requires_default_grid() {
        let s = SampledSpectrum::zeros(SpectralGrid::new(400.0, 700.0, 10.0).unwrap());
        assert_eq!(spectrum_to_rgb(&s), Err(SpectraError::GridMismatch));
    }

    #[test]
    fn presets_follow_stokes_shifts() {
        let red = make_paint_preset("red").unwrap();
        let green = make_paint_preset("Green").unwrap();
        assert_eq!(red.stokes_shift, 100.0);
        assert_eq!(green.stokes_shift, 50.0);
        assert_eq!(red.absorption.lambda0, EXCITATION_WAVELENGTH);
        assert_eq!(red.emission.lambda0, 550.0);
        assert!((0.02..=0.05).contains(&red.conversion_efficiency));
        assert!(matches!(
            make_paint_preset("blue"),
            Err(SpectraError::UnknownPreset(_))
        ));
    }

    #[test]
    fn preset_emission_colours() {
        let red = PaintPreset::Red.material().emission_color();
        assert!(red.r() > red.g() && red.r() > red.b());
        let green = PaintPreset::Green.material().emission_color();
        assert!(green.g() > green.r() && green.g() > green.b());
        let base = PaintPreset::Red.material().base_albedo();
        assert!(base.r() > base.g() && base.r() > base.b());
    }

    #[test]
    fn material_rejects_inconsistent_shift() {
        let mut m = PaintPreset::Red.material();
        m.stokes_shift = 90.0;
        assert!(m.validate().is_err());
        assert!(PaintPreset::Red
            .material()
            .with_conversion_efficiency(1.5)
            .is_err());
    }

    #[test]
    fn blue_source_is_mostly_absorbed_by_red_paint() {
        let red = PaintPreset::Red.material();
        let frac = red.absorbed_fraction(&blue_led_spectrum());
        assert!(frac > 0.5 && frac <= 1.0, "{frac}");
        assert_eq!(
            red.absorbed_fraction(&SampledSpectrum::zeros(SpectralGrid::DEFAULT)),
            0.0
        );
    }

    fn arb_params() -> impl Strategy<Value = SkewCauchyParams> {
        (
            200.0..1000.0f64,
            0.5..200.0f64,
            -20.0..20.0f64,
            1e-3..1e6f64,
        )
            .prop_map(|(l, g, w, h)| SkewCauchyParams::new(l, g, w, h).unwrap())
    }

    proptest! {
        #[test]
        fn peak_identity(q in arb_params()) {
            let expected = q.h / (2.0 * q.gamma * q.gamma);
            prop_assert!((q.eval(q.lambda0) - expected).abs() <= 1e-12 * expected.max(1.0));
        }

        #[test]
        fn strictly_positive(q in arb_params(), lambda in 200.0..1000.0f64) {
            prop_assert!(q.eval(lambda) > 0.0);
        }

        #[test]
        fn symmetric_without_skew(l in 300.0..900.0f64, g in 1.0..100.0f64, h in 1.0..1e4f64, d in 0.0..100.0f64) {
            let q = SkewCauchyParams::new(l, g, 0.0, h).unwrap();
            prop_assert!((q.eval(l + d) - q.eval(l - d)).abs() < 1e-12);
        }

        #[test]
        fn rgb_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, q1 in arb_params(), q2 in arb_params()) {
            let s1 = sample_model(&q1, &SpectralGrid::DEFAULT);
            let s2 = sample_model(&q2, &SpectralGrid::DEFAULT);
            // Raw-value combination; negative weights are allowed here.
            let combo: Vec<f64> = s1.values().iter().zip(s2.values()).map(|(x, y)| a * x + b * y).collect();
            let raw = unbalanced_rgb(&combo, 5.0);
            let wb = white_balance();
            let lhs = Rgb::new(raw[0] / wb[0], raw[1] / wb[1], raw[2] / wb[2]);
            let rhs = spectrum_to_rgb(&s1).unwrap() * a + spectrum_to_rgb(&s2).unwrap() * b;
            let scale = 1.0 + lhs.0.iter().map(|c| c.abs()).fold(0.0, f64::max);
            for k in 0..3 {
                prop_assert!((lhs.0[k] - rhs.0[k]).abs() <= 1e-9 * scale);
            }
        }
    }
}
