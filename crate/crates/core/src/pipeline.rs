//! End-to-end noise conditioning: transform, substitute phase, balance
//! energy, transform back.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::balance::{apply_energy_balance, apply_uncompensated, substitute_phase, BalanceParams};
use crate::error::{Error, Result};
use crate::mask::{mask_for, Cutoff, FrequencyMask};
use crate::tensor::{Domain, LatentTensor, Precision, Shape};
use crate::transform::{dft, idft_with_residual};

/// Low-band attenuation used with a temporal cutoff (image-to-video, cut and drag).
pub const TEMPORAL_DEFAULT_GAMMA: f64 = 30.0;
pub const TEMPORAL_DEFAULT_K: usize = 3;
/// Low-band attenuation used with a spatial ratio (text-to-video).
pub const SPATIAL_DEFAULT_GAMMA: f64 = 4.0;
pub const SPATIAL_DEFAULT_RATIO: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningConfig {
    pub domain: Domain,
    pub cutoff: Cutoff,
    pub gamma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub precision: Precision,
}

impl ConditioningConfig {
    pub fn temporal(k: usize, gamma: f64) -> Self {
        ConditioningConfig {
            domain: Domain::Temporal,
            cutoff: Cutoff::K(k),
            gamma,
            seed: 0,
            precision: Precision::F64,
        }
    }

    pub fn spatial(ratio: f64, gamma: f64) -> Self {
        ConditioningConfig {
            domain: Domain::Spatial,
            cutoff: Cutoff::Ratio(ratio),
            gamma,
            seed: 0,
            precision: Precision::F64,
        }
    }

    /// Default parameters for a domain.
    pub fn default_for(domain: Domain) -> Self {
        match domain {
            Domain::Temporal => Self::temporal(TEMPORAL_DEFAULT_K, TEMPORAL_DEFAULT_GAMMA),
            Domain::Spatial => Self::spatial(SPATIAL_DEFAULT_RATIO, SPATIAL_DEFAULT_GAMMA),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "gamma must be finite and >= 1, got {}",
                self.gamma
            )));
        }
        match (self.domain, self.cutoff) {
            (Domain::Temporal, Cutoff::K(_)) | (Domain::Spatial, Cutoff::Ratio(_)) => Ok(()),
            (Domain::Temporal, Cutoff::Ratio(_)) => Err(Error::InvalidInput(
                "temporal conditioning takes an integer k".into(),
            )),
            (Domain::Spatial, Cutoff::K(_)) => {
                Err(Error::InvalidInput("spatial conditioning takes a ratio".into()))
            }
        }
    }

    pub fn mask(&self, shape: Shape) -> Result<FrequencyMask> {
        self.validate()?;
        mask_for(self.domain, shape, self.cutoff)
    }
}

/// Draws i.i.d. standard normal samples.
///
/// The generator is ChaCha20 seeded with `seed_from_u64(seed)`. Each pair of
/// outputs comes from two 53-bit uniforms `u1 in (0, 1]`, `u2 in [0, 1)` via
/// Box-Muller: `sqrt(-2 ln u1) * (cos 2 pi u2, sin 2 pi u2)`. F32 tensors
/// round the same f64 draws.
pub fn sample_noise(shape: Shape, seed: u64, precision: Precision) -> Result<LatentTensor> {
    shape.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let n = shape.len();
    let mut data = Vec::with_capacity(n + 1);
    while data.len() < n {
        let u1 = 1.0 - uniform();
        let u2 = uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * PI * u2;
        data.push(radius * angle.cos());
        data.push(radius * angle.sin());
    }
    data.truncate(n);
    LatentTensor::with_precision(shape, data, precision)
}

/// Whether the high band is rescaled to restore the input energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceMode {
    Balanced,
    /// `beta` fixed to 1; the masked band is attenuated and energy drops.
    Uncompensated,
}

#[derive(Debug, Clone)]
pub struct PhiOutput {
    pub latent: LatentTensor,
    pub params: BalanceParams,
    /// Largest imaginary part discarded by the inverse transform.
    pub imag_residual: f64,
    /// Largest magnitude in the spectrum that was inverted.
    pub spectrum_peak: f64,
    pub mask: FrequencyMask,
}

/// Conditions `noise` on the low-frequency phase of `reference`.
pub fn phi_noise(
    noise: &LatentTensor,
    reference: &LatentTensor,
    config: &ConditioningConfig,
) -> Result<(LatentTensor, BalanceParams)> {
    let out = phi_noise_detailed(noise, reference, config, BalanceMode::Balanced)?;
    Ok((out.latent, out.params))
}

pub fn phi_noise_detailed(
    noise: &LatentTensor,
    reference: &LatentTensor,
    config: &ConditioningConfig,
    mode: BalanceMode,
) -> Result<PhiOutput> {
    config.validate()?;
    if noise.shape() != reference.shape() {
        return Err(Error::InvalidInput(format!(
            "noise shape {} does not match reference shape {}",
            noise.shape(),
            reference.shape()
        )));
    }
    let mask = config.mask(noise.shape())?;
    // F32 tensors already hold their values as f64, so no upcast is needed
    let noise_spec = dft(noise, config.domain)?;
    let ref_spec = dft(reference, config.domain)?;
    let substituted = substitute_phase(&noise_spec, &ref_spec, &mask)?;
    let (balanced, params) = match mode {
        BalanceMode::Balanced => apply_energy_balance(&substituted, &mask, config.gamma)?,
        BalanceMode::Uncompensated => apply_uncompensated(&substituted, &mask, config.gamma)?,
    };
    let spectrum_peak = balanced.max_abs();
    let (latent, imag_residual) = idft_with_residual(&balanced)?;
    let latent = latent.to_precision(config.precision)?;
    Ok(PhiOutput {
        latent,
        params,
        imag_residual,
        spectrum_peak,
        mask,
    })
}
