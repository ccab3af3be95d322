//! Damped least-squares fitting of skew-Cauchy lobes to measured spectra.

use super::SampledSpectrum;
use super::{SkewCauchyParams, SpectraError, LAMBDA0_RANGE};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// The calibration rig has eight band-pass filters; fewer samples cannot pin
/// down four parameters reliably.
pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative cost decrease below which the fit is considered converged.
    pub ftol: f64,
    /// Relative parameter step below which the fit is considered converged.
    pub xtol: f64,
    pub initial_damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            ftol: 1e-15,
            xtol: 1e-12,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: SkewCauchyParams,
    /// Sum of squared residuals.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FitReport {
    pub fn rms(&self, samples: usize) -> f64 {
        (self.residual / samples.max(1) as f64).sqrt()
    }

    /// Turns an unconverged report into [`SpectraError::NonConvergence`].
    pub fn require_converged(self) -> Result<Self, SpectraError> {
        if self.converged {
            Ok(self)
        } else {
            Err(SpectraError::NonConvergence(Box::new(self)))
        }
    }
}

/// Joint absorption/emission fit sharing one Stokes shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaintFit {
    pub absorption: FitReport,
    pub emission: FitReport,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct LmOutcome {
    x: DVector<f64>,
    cost: f64,
    iterations: usize,
    converged: bool,
}

/// Levenberg–Marquardt with Marquardt diagonal scaling; every trial point is
/// projected onto the box `[lower, upper]`.
///
/// `eval` fills the residual vector and Jacobian at the given parameters.
fn levenberg_marquardt<F>(
    x0: DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    n_residuals: usize,
    eval: F,
    opts: &FitOptions,
) -> LmOutcome
where
    F: Fn(&DVector<f64>, &mut DVector<f64>, &mut DMatrix<f64>),
{
    let n = x0.len();
    let project = |v: &DVector<f64>| {
        DVector::from_iterator(n, (0..n).map(|i| v[i].clamp(lower[i], upper[i])))
    };
    let mut x = project(&x0);
    let mut r = DVector::zeros(n_residuals);
    let mut j = DMatrix::zeros(n_residuals, n);
    eval(&x, &mut r, &mut j);
    let mut cost = r.norm_squared();
    let mut mu = opts.initial_damping;
    let mut r_trial = DVector::zeros(n_residuals);
    let mut j_trial = DMatrix::zeros(n_residuals, n);

    for it in 1..=opts.max_iterations {
        if cost == 0.0 {
            return LmOutcome {
                x,
                cost,
                iterations: it - 1,
                converged: true,
            };
        }
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        if g.amax() <= 1e-300 {
            return LmOutcome {
                x,
                cost,
                iterations: it - 1,
                converged: true,
            };
        }
        let diag: Vec<f64> = (0..n).map(|i| jtj[(i, i)].max(1e-30)).collect();
        let mut accepted = false;
        while mu < 1e20 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += mu * diag[i];
            }
            let Some(chol) = a.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = -chol.solve(&g);
            let x_trial = project(&(&x + &step));
            eval(&x_trial, &mut r_trial, &mut j_trial);
            let trial_cost = r_trial.norm_squared();
            if trial_cost.is_finite() && trial_cost <= cost {
                let dx = (&x_trial - &x).norm();
                let decrease = cost - trial_cost;
                x = x_trial;
                std::mem::swap(&mut r, &mut r_trial);
                std::mem::swap(&mut j, &mut j_trial);
                cost = trial_cost;
                mu = (mu * 0.3).max(1e-15);
                accepted = true;
                if decrease <= opts.ftol * cost || dx <= opts.xtol * (x.norm() + opts.xtol) {
                    return LmOutcome {
                        x,
                        cost,
                        iterations: it,
                        converged: true,
                    };
                }
                break;
            }
            mu *= 10.0;
        }
        if !accepted {
            // No descent direction left at machine precision: a stationary point.
            return LmOutcome {
                x,
                cost,
                iterations: it,
                converged: true,
            };
        }
    }
    LmOutcome {
        x,
        cost,
        iterations: opts.max_iterations,
        converged: false,
    }
}

fn lower_bounds() -> [f64; 4] {
    [LAMBDA0_RANGE.0, 1e-6, -1e4, 1e-300]
}

fn upper_bounds() -> [f64; 4] {
    [LAMBDA0_RANGE.1, 1e6, 1e4, f64::MAX]
}

fn check_points(points: &[(f64, f64)]) -> Result<(), SpectraError> {
    if points.len() < MIN_SAMPLES {
        return Err(SpectraError::TooFewSamples {
            needed: MIN_SAMPLES,
            got: points.len(),
        });
    }
    if points.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
        return Err(SpectraError::DegenerateInput("non-finite sample".into()));
    }
    if points.iter().all(|p| p.1 <= 0.0) {
        return Err(SpectraError::DegenerateInput("all samples are zero".into()));
    }
    Ok(())
}

fn params_from(x: &[f64]) -> SkewCauchyParams {
    SkewCauchyParams {
        lambda0: x[0],
        gamma: x[1],
        omega: x[2],
        h: x[3],
    }
}

/// Fits one lobe to `(wavelength, value)` samples.
pub fn fit_points(
    points: &[(f64, f64)],
    init: SkewCauchyParams,
    opts: &FitOptions,
) -> Result<FitReport, SpectraError> {
    init.validate()?;
    check_points(points)?;
    let x0 = DVector::from_vec(vec![init.lambda0, init.gamma, init.omega, init.h]);
    let lo = DVector::from_row_slice(&lower_bounds());
    let hi = DVector::from_row_slice(&upper_bounds());
    let out = levenberg_marquardt(
        x0,
        &lo,
        &hi,
        points.len(),
        |x, r, j| {
            let p = params_from(x.as_slice());
            for (i, &(l, y)) in points.iter().enumerate() {
                r[i] = p.eval(l) - y;
                let g = p.gradient(l);
                for k in 0..4 {
                    j[(i, k)] = g[k];
                }
            }
        },
        opts,
    );
    Ok(FitReport {
        params: params_from(out.x.as_slice()),
        residual: out.cost,
        iterations: out.iterations,
        converged: out.converged,
    })
}

/// Fits one lobe to a sampled spectrum with default options.
///
/// An unconverged fit is still returned, flagged through
/// [`FitReport::converged`]; use [`FitReport::require_converged`] to treat it
/// as an error.
pub fn fit_spectrum(
    measured: &SampledSpectrum,
    init: SkewCauchyParams,
) -> Result<FitReport, SpectraError> {
    fit_points(&measured.points(), init, &FitOptions::default())
}

/// Fits the emission lobe with its location pinned to
/// `absorption.lambda0 + stokes_shift`; only width, skew and height move.
pub fn fit_emission_with_shift(
    points: &[(f64, f64)],
    absorption: &SkewCauchyParams,
    stokes_shift: f64,
    init: SkewCauchyParams,
    opts: &FitOptions,
) -> Result<FitReport, SpectraError> {
    absorption.validate()?;
    check_points(points)?;
    let lambda0 = absorption.lambda0 + stokes_shift;
    let init = SkewCauchyParams { lambda0, ..init };
    init.validate()?;
    let (lo, hi) = (lower_bounds(), upper_bounds());
    let out = levenberg_marquardt(
        DVector::from_vec(vec![init.gamma, init.omega, init.h]),
        &DVector::from_row_slice(&lo[1..]),
        &DVector::from_row_slice(&hi[1..]),
        points.len(),
        |x, r, j| {
            let p = params_from(&[lambda0, x[0], x[1], x[2]]);
            for (i, &(l, y)) in points.iter().enumerate() {
                r[i] = p.eval(l) - y;
                let g = p.gradient(l);
                for k in 0..3 {
                    j[(i, k)] = g[k + 1];
                }
            }
        },
        opts,
    );
    Ok(FitReport {
        params: params_from(&[lambda0, out.x[0], out.x[1], out.x[2]]),
        residual: out.cost,
        iterations: out.iterations,
        converged: out.converged,
    })
}

/// Jointly fits absorption and emission lobes with the hard constraint
/// `emission.lambda0 = absorption.lambda0 + stokes_shift`.
///
/// Parameter vector: `[λ₀, γa, ωa, ha, γe, ωe, he]`.
pub fn fit_paint_joint(
    absorption_points: &[(f64, f64)],
    emission_points: &[(f64, f64)],
    stokes_shift: f64,
    init_absorption: SkewCauchyParams,
    init_emission: SkewCauchyParams,
    opts: &FitOptions,
) -> Result<PaintFit, SpectraError> {
    check_points(absorption_points)?;
    check_points(emission_points)?;
    init_absorption.validate()?;
    init_emission.validate()?;
    if !(stokes_shift > 0.0) {
        return Err(SpectraError::InvalidMaterial(format!(
            "Stokes shift must be positive, got {stokes_shift}"
        )));
    }
    let (lo4, hi4) = (lower_bounds(), upper_bounds());
    let lo = DVector::from_vec(vec![lo4[0], lo4[1], lo4[2], lo4[3], lo4[1], lo4[2], lo4[3]]);
    let mut hi = DVector::from_vec(vec![hi4[0], hi4[1], hi4[2], hi4[3], hi4[1], hi4[2], hi4[3]]);
    hi[0] = (LAMBDA0_RANGE.1 - stokes_shift).max(LAMBDA0_RANGE.0);
    let na = absorption_points.len();
    let x0 = DVector::from_vec(vec![
        init_absorption.lambda0,
        init_absorption.gamma,
        init_absorption.omega,
        init_absorption.h,
        init_emission.gamma,
        init_emission.omega,
        init_emission.h,
    ]);
    let split = |x: &DVector<f64>| {
        (
            params_from(&[x[0], x[1], x[2], x[3]]),
            params_from(&[x[0] + stokes_shift, x[4], x[5], x[6]]),
        )
    };
    let out = levenberg_marquardt(
        x0,
        &lo,
        &hi,
        na + emission_points.len(),
        |x, r, j| {
            let (pa, pe) = split(x);
            j.fill(0.0);
            for (i, &(l, y)) in absorption_points.iter().enumerate() {
                r[i] = pa.eval(l) - y;
                let g = pa.gradient(l);
                for k in 0..4 {
                    j[(i, k)] = g[k];
                }
            }
            for (i, &(l, y)) in emission_points.iter().enumerate() {
                let row = na + i;
                r[row] = pe.eval(l) - y;
                let g = pe.gradient(l);
                j[(row, 0)] = g[0];
                for k in 1..4 {
                    j[(row, k + 3)] = g[k];
                }
            }
        },
        opts,
    );
    let (pa, pe) = split(&out.x);
    let part = |p: SkewCauchyParams, pts: &[(f64, f64)]| FitReport {
        params: p,
        residual: pts.iter().map(|&(l, y)| (p.eval(l) - y).powi(2)).sum(),
        iterations: out.iterations,
        converged: out.converged,
    };
    Ok(PaintFit {
        absorption: part(pa, absorption_points),
        emission: part(pe, emission_points),
        residual: out.cost,
        iterations: out.iterations,
        converged: out.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{sample_model, SpectralGrid, FILTER_WAVELENGTHS};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn truth() -> SkewCauchyParams {
        SkewCauchyParams::new(585.0, 28.0, 1.8, 1500.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn recovers_noiseless_parameters() {
        let s = sample_model(&truth(), &SpectralGrid::DEFAULT);
        let init = SkewCauchyParams::new(570.0, 35.0, 0.5, 1100.0).unwrap();
        let rep = fit_spectrum(&s, init).unwrap().require_converged().unwrap();
        let (p, t) = (rep.params, truth());
        for (a, b) in [
            (p.lambda0, t.lambda0),
            (p.gamma, t.gamma),
            (p.omega, t.omega),
            (p.h, t.h),
        ] {
            assert!(rel(a, b) < 1e-4, "{p} vs {t}");
        }
        assert!(rep.residual < 1e-20);
    }

    #[test]
    fn refit_is_idempotent() {
        let s = sample_model(&truth(), &SpectralGrid::DEFAULT);
        let init = SkewCauchyParams::new(600.0, 20.0, 0.0, 900.0).unwrap();
        let first = fit_spectrum(&s, init).unwrap();
        let second = fit_spectrum(&s, first.params).unwrap();
        assert!((first.residual - second.residual).abs() < 1e-10);
    }

    #[test]
    fn all_zero_input_is_degenerate() {
        let s = SampledSpectrum::zeros(SpectralGrid::DEFAULT);
        assert!(matches!(
            fit_spectrum(&s, truth()),
            Err(SpectraError::DegenerateInput(_))
        ));
    }

    #[test]
    fn too_few_samples() {
        let pts: Vec<_> = (0..7).map(|i| (500.0 + 10.0 * i as f64, 1.0)).collect();
        assert!(matches!(
            fit_points(&pts, truth(), &FitOptions::default()),
            Err(SpectraError::TooFewSamples { needed: 8, got: 7 })
        ));
    }

    #[test]
    fn unconverged_fit_is_flagged() {
        let s = sample_model(&truth(), &SpectralGrid::DEFAULT);
        let init = SkewCauchyParams::new(520.0, 60.0, -1.0, 200.0).unwrap();
        let opts = FitOptions {
            max_iterations: 2,
            ..Default::default()
        };
        let rep = fit_points(&s.points(), init, &opts).unwrap();
        assert!(!rep.converged);
        assert!(matches!(
            rep.require_converged(),
            Err(SpectraError::NonConvergence(_))
        ));
    }

    #[test]
    fn eight_filter_samples_fit_within_bounds() {
        let pts: Vec<_> = FILTER_WAVELENGTHS
            .iter()
            .map(|&l| (l, truth().eval(l)))
            .collect();
        let init = SkewCauchyParams::initial_guess(&pts).unwrap();
        let rep = fit_points(&pts, init, &FitOptions::default()).unwrap();
        rep.params.validate().unwrap();
    }

    #[test]
    fn pinned_emission_keeps_shift() {
        let abs = SkewCauchyParams::new(450.0, 30.0, 0.0, 1800.0).unwrap();
        let em = SkewCauchyParams::new(550.0, 40.0, 2.5, 3200.0).unwrap();
        let pts = sample_model(&em, &SpectralGrid::DEFAULT).points();
        let init = SkewCauchyParams::new(500.0, 30.0, 0.0, 2000.0).unwrap();
        let rep = fit_emission_with_shift(&pts, &abs, 100.0, init, &FitOptions::default()).unwrap();
        assert_eq!(rep.params.lambda0, 550.0);
        assert!(rel(rep.params.gamma, 40.0) < 1e-6 && rel(rep.params.omega, 2.5) < 1e-6);
    }

    #[test]
    fn joint_fit_enforces_shift() {
        let abs = SkewCauchyParams::new(452.0, 30.0, 0.5, 1800.0).unwrap();
        let em = SkewCauchyParams::new(502.0, 22.0, 2.0, 1000.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noisy = |p: &SkewCauchyParams, rng: &mut ChaCha8Rng| -> Vec<(f64, f64)> {
            sample_model(p, &SpectralGrid::DEFAULT)
                .points()
                .into_iter()
                .map(|(l, v)| (l, v + 1e-3 * rng.random_range(-1.0..1.0)))
                .collect()
        };
        let pa = noisy(&abs, &mut rng);
        let pe = noisy(&em, &mut rng);
        let ia = SkewCauchyParams::new(445.0, 25.0, 0.0, 1500.0).unwrap();
        let ie = SkewCauchyParams::new(495.0, 25.0, 0.0, 1500.0).unwrap();
        let fit = fit_paint_joint(&pa, &pe, 50.0, ia, ie, &FitOptions::default()).unwrap();
        assert!((fit.emission.params.lambda0 - fit.absorption.params.lambda0 - 50.0).abs() < 1e-9);
        assert!((fit.absorption.params.lambda0 - 452.0).abs() < 0.5);
    }
}
