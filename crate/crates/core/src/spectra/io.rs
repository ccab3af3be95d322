//! Measured-spectrum CSV input and fit-report output.

use super::{eval_skew_cauchy, FitReport, SampledSpectrum, SpectraError, SpectralGrid};
use crate::svg::{Plot, Series, SeriesStyle};
use std::io::{Read, Write};

/// Raw `(wavelength, value)` samples, sorted by wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredSpectrum {
    pub points: Vec<(f64, f64)>,
}

impl MeasuredSpectrum {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self, SpectraError> {
        if points.is_empty() {
            return Err(SpectraError::Csv("no data rows".into()));
        }
        if points.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
            return Err(SpectraError::Csv("non-finite value".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(SpectraError::Csv("duplicate wavelength".into()));
        }
        Ok(Self { points })
    }

    /// Linear interpolation onto `grid`. Outside the measured range the
    /// nearest endpoint value is held; negative values clamp to zero.
    pub fn resample(&self, grid: &SpectralGrid) -> SampledSpectrum {
        let pts = &self.points;
        SampledSpectrum::from_fn(*grid, |l| {
            if l <= pts[0].0 {
                return pts[0].1;
            }
            if l >= pts[pts.len() - 1].0 {
                return pts[pts.len() - 1].1;
            }
            let i = pts.partition_point(|p| p.0 <= l);
            let (a, b) = (pts[i - 1], pts[i]);
            a.1 + (b.1 - a.1) * (l - a.0) / (b.0 - a.0)
        })
    }
}

/// Reads a `wavelength_nm,value` CSV (rows in any order).
pub fn read_measured_csv<R: Read>(reader: R) -> Result<MeasuredSpectrum, SpectraError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| SpectraError::Csv(e.to_string()))?
        .clone();
    if headers.len() != 2 || &headers[0] != "wavelength_nm" || &headers[1] != "value" {
        return Err(SpectraError::Csv(format!(
            "expected header `wavelength_nm,value`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut points = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| SpectraError::Csv(e.to_string()))?;
        let parse = |k: usize| {
            rec.get(k)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| SpectraError::Csv(format!("row {}: {e}", line + 2)))
        };
        points.push((parse(0)?, parse(1)?));
    }
    MeasuredSpectrum::new(points)
}

/// Writes the `wavelength,measured,fitted` report preceded by a one-line
/// `#` parameter summary.
pub fn write_fit_report<W: Write>(
    mut out: W,
    measured: &[(f64, f64)],
    report: &FitReport,
) -> std::io::Result<()> {
    writeln!(
        out,
        "# {} residual={:.6e} iterations={} converged={}",
        report.params, report.residual, report.iterations, report.converged
    )?;
    writeln!(out, "wavelength,measured,fitted")?;
    for &(l, m) in measured {
        writeln!(out, "{l},{m},{}", eval_skew_cauchy(&report.params, l))?;
    }
    Ok(())
}

/// Measured points over the fitted curve, one panel.
pub fn fit_plot(title: &str, measured: &[(f64, f64)], report: &FitReport, color: &str) -> Plot {
    let lo = measured
        .iter()
        .map(|p| p.0)
        .fold(f64::INFINITY, f64::min)
        .min(380.0);
    let hi = measured
        .iter()
        .map(|p| p.0)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(720.0);
    let curve: Vec<(f64, f64)> = (0..=400)
        .map(|i| {
            let l = lo + (hi - lo) * i as f64 / 400.0;
            (l, eval_skew_cauchy(&report.params, l))
        })
        .collect();
    Plot::new(title, "wavelength (nm)", "relative emission")
        .with_series(Series::new(
            "measured",
            measured.to_vec(),
            SeriesStyle::Markers,
            "#333333",
        ))
        .with_series(Series::new("simulated", curve, SeriesStyle::Line, color))
}
