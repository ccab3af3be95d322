//! Strain-energy densities in principal stretches (MPa).

use serde::{Deserialize, Serialize};

use super::DeformError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ConstitutiveParams {
    Ogden2 { mu: [f64; 2], alpha: [f64; 2] },
    NeoHookean { c10: f64 },
    LinearElastic { e: f64, nu: f64 },
}

impl ConstitutiveParams {
    /// TPU 95A skeleton.
    pub const TPU_95A: Self = Self::Ogden2 {
        mu: [6.279, 1.639],
        alpha: [1.6663, -7.136],
    };
    /// PDMS gel pad.
    pub const PDMS: Self = Self::NeoHookean { c10: 0.1333 };
    pub const ONYX: Self = Self::LinearElastic {
        e: 2100.0,
        nu: 0.38,
    };
    pub const PET_G: Self = Self::LinearElastic { e: 2800.0, nu: 0.4 };
    pub const MYLAR: Self = Self::LinearElastic {
        e: 5000.0,
        nu: 0.38,
    };

    pub fn preset(name: &str) -> Option<Self> {
        Some(match name.to_ascii_lowercase().as_str() {
            "tpu" | "tpu95a" | "tpu_95a" => Self::TPU_95A,
            "pdms" => Self::PDMS,
            "onyx" => Self::ONYX,
            "petg" | "pet-g" | "pet_g" => Self::PET_G,
            "mylar" => Self::MYLAR,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<(), DeformError> {
        let ok = match *self {
            Self::Ogden2 { mu, alpha } => {
                mu.iter().chain(&alpha).all(|v| v.is_finite()) && alpha.iter().all(|&a| a != 0.0)
            }
            Self::NeoHookean { c10 } => c10 > 0.0,
            Self::LinearElastic { e, nu } => e > 0.0 && nu > -1.0 && nu < 0.5,
        };
        if ok {
            Ok(())
        } else {
            Err(DeformError::InvalidParams(format!("{self:?}")))
        }
    }

    /// Small-strain shear modulus implied by the parameters.
    pub fn initial_shear_modulus(&self) -> f64 {
        match *self {
            Self::Ogden2 { mu, alpha } => 0.5 * (mu[0] * alpha[0] + mu[1] * alpha[1]),
            Self::NeoHookean { c10 } => 2.0 * c10,
            Self::LinearElastic { e, nu } => e / (2.0 * (1.0 + nu)),
        }
    }
}

fn check_stretches(l: &[f64; 3]) -> Result<(), DeformError> {
    if l.iter().all(|&x| x > 0.0 && x.is_finite()) {
        Ok(())
    } else {
        Err(DeformError::NonPositiveStretch(*l))
    }
}

/// Σ_p μ_p/α_p (λ₁^α_p + λ₂^α_p + λ₃^α_p − 3).
pub fn ogden_energy(l: [f64; 3], p: &ConstitutiveParams) -> Result<f64, DeformError> {
    check_stretches(&l)?;
    let ConstitutiveParams::Ogden2 { mu, alpha } = *p else {
        return Err(DeformError::WrongModel("ogden2"));
    };
    Ok((0..2)
        .map(|k| mu[k] / alpha[k] * (l.iter().map(|x| x.powf(alpha[k])).sum::<f64>() - 3.0))
        .sum())
}

pub fn ogden_gradient(l: [f64; 3], p: &ConstitutiveParams) -> Result<[f64; 3], DeformError> {
    check_stretches(&l)?;
    let ConstitutiveParams::Ogden2 { mu, alpha } = *p else {
        return Err(DeformError::WrongModel("ogden2"));
    };
    Ok(l.map(|x| (0..2).map(|k| mu[k] * x.powf(alpha[k] - 1.0)).sum()))
}

/// C₁₀ (λ₁² + λ₂² + λ₃² − 3).
pub fn neo_hookean_energy(l: [f64; 3], p: &ConstitutiveParams) -> Result<f64, DeformError> {
    check_stretches(&l)?;
    let ConstitutiveParams::NeoHookean { c10 } = *p else {
        return Err(DeformError::WrongModel("neo_hookean"));
    };
    Ok(c10 * (l.iter().map(|x| x * x).sum::<f64>() - 3.0))
}

pub fn neo_hookean_gradient(l: [f64; 3], p: &ConstitutiveParams) -> Result<[f64; 3], DeformError> {
    check_stretches(&l)?;
    let ConstitutiveParams::NeoHookean { c10 } = *p else {
        return Err(DeformError::WrongModel("neo_hookean"));
    };
    Ok(l.map(|x| 2.0 * c10 * x))
}

/// Small-strain energy with principal strains λᵢ − 1.
pub fn linear_elastic_energy(l: [f64; 3], p: &ConstitutiveParams) -> Result<f64, DeformError> {
    check_stretches(&l)?;
    let ConstitutiveParams::LinearElastic { e, nu } = *p else {
        return Err(DeformError::WrongModel("linear_elastic"));
    };
    let (lam, mu) = lame(e, nu);
    let eps = l.map(|x| x - 1.0);
    let tr: f64 = eps.iter().sum();
    Ok(0.5 * lam * tr * tr + mu * eps.iter().map(|x| x * x).sum::<f64>())
}

pub fn linear_elastic_gradient(
    l: [f64; 3],
    p: &ConstitutiveParams,
) -> Result<[f64; 3], DeformError> {
    check_stretches(&l)?;
    let ConstitutiveParams::LinearElastic { e, nu } = *p else {
        return Err(DeformError::WrongModel("linear_elastic"));
    };
    let (lam, mu) = lame(e, nu);
    let tr: f64 = l.iter().map(|x| x - 1.0).sum();
    Ok(l.map(|x| lam * tr + 2.0 * mu * (x - 1.0)))
}

fn lame(e: f64, nu: f64) -> (f64, f64) {
    (
        e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
        e / (2.0 * (1.0 + nu)),
    )
}

/// Energy for whichever model `p` describes.
pub fn strain_energy(l: [f64; 3], p: &ConstitutiveParams) -> Result<f64, DeformError> {
    match p {
        ConstitutiveParams::Ogden2 { .. } => ogden_energy(l, p),
        ConstitutiveParams::NeoHookean { .. } => neo_hookean_energy(l, p),
        ConstitutiveParams::LinearElastic { .. } => linear_elastic_energy(l, p),
    }
}

pub fn strain_energy_gradient(
    l: [f64; 3],
    p: &ConstitutiveParams,
) -> Result<[f64; 3], DeformError> {
    match p {
        ConstitutiveParams::Ogden2 { .. } => ogden_gradient(l, p),
        ConstitutiveParams::NeoHookean { .. } => neo_hookean_gradient(l, p),
        ConstitutiveParams::LinearElastic { .. } => linear_elastic_gradient(l, p),
    }
}
