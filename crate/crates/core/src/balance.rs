//! Phase substitution and the energy-balancing mask.
//!
//! Substitution keeps the noise magnitude and takes the reference phase on
//! masked bins. Balancing scales masked bins by `1/gamma` and the rest by
//! one global `beta`, chosen so that
//!
//! ```text
//! E_low / gamma^2 + beta^2 * E_high = E_total
//! ```
//!
//! which gives `beta = sqrt((E_total - E_low / gamma^2) / E_high)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::FrequencyMask;
use crate::tensor::{bin_phase, Spectrum};

/// Energy ledger and scale factors of one balancing pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceParams {
    pub gamma: f64,
    pub beta: f64,
    pub e_total: f64,
    pub e_low: f64,
    pub e_high: f64,
    /// Number of masked frequency bins (not tensor elements).
    pub masked_bins: usize,
}

impl BalanceParams {
    /// `E_low / gamma^2 + beta^2 * E_high`, which should equal `e_total`.
    pub fn balanced_energy(&self) -> f64 {
        self.e_low / (self.gamma * self.gamma) + self.beta * self.beta * self.e_high
    }
}

fn check_pair(noise: &Spectrum, reference: &Spectrum, mask: &FrequencyMask) -> Result<()> {
    if noise.shape() != reference.shape() {
        return Err(Error::InvalidInput(format!(
            "noise shape {} does not match reference shape {}",
            noise.shape(),
            reference.shape()
        )));
    }
    if noise.domain() != reference.domain() {
        return Err(Error::InvalidInput(format!(
            "noise is {} but reference is {}",
            noise.domain(),
            reference.domain()
        )));
    }
    mask.check_spectrum(noise)
}

/// Replaces the phase of every masked bin of `noise` with the phase of the
/// same bin of `reference`, keeping the noise magnitude. Unmasked bins are
/// copied unchanged.
pub fn substitute_phase(
    noise: &Spectrum,
    reference: &Spectrum,
    mask: &FrequencyMask,
) -> Result<Spectrum> {
    check_pair(noise, reference, mask)?;
    let shape = noise.shape();
    let data = noise
        .data()
        .iter()
        .zip(reference.data())
        .enumerate()
        .map(|(i, (&z, &v))| {
            if mask.is_selected(mask.bin_of(shape, i)) {
                Complex64::from_polar(z.norm(), bin_phase(v))
            } else {
                z
            }
        })
        .collect();
    Spectrum::new(shape, data, noise.domain())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "gamma must be finite and >= 1, got {gamma}"
        )));
    }
    Ok(())
}

/// Compensation factor for the high band.
pub fn compute_beta(e_total: f64, e_low: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(e_total.is_finite() && e_low.is_finite() && e_low >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "energies must be finite and non-negative, got total {e_total}, low {e_low}"
        )));
    }
    let e_high = e_total - e_low;
    if !(e_high > 0.0) {
        return Err(Error::DegenerateSpectrum(format!(
            "no energy outside the masked band (total {e_total}, low {e_low})"
        )));
    }
    Ok(((e_total - e_low / (gamma * gamma)) / e_high).sqrt())
}

/// Total and masked-band energy, summed in element order.
pub fn band_energies(spec: &Spectrum, mask: &FrequencyMask) -> Result<(f64, f64, f64)> {
    mask.check_spectrum(spec)?;
    let shape = spec.shape();
    let (mut total, mut low, mut high) = (0.0, 0.0, 0.0);
    for (i, c) in spec.data().iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        if mask.is_selected(mask.bin_of(shape, i)) {
            low += e;
        } else {
            high += e;
        }
    }
    if !total.is_finite() {
        return Err(Error::InvalidInput("spectrum energy is not finite".into()));
    }
    Ok((total, low, high))
}

fn scale_bands(spec: &Spectrum, mask: &FrequencyMask, low_scale: f64, high_scale: f64) -> Spectrum {
    let shape = spec.shape();
    let data = spec
        .data()
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if mask.is_selected(mask.bin_of(shape, i)) {
                c * low_scale
            } else {
                c * high_scale
            }
        })
        .collect();
    Spectrum::from_parts_unchecked(shape, data, spec.domain())
}

/// Applies the balancing mask: masked bins times `1/gamma`, the rest times
/// `beta`. The output has the same energy as the input.
pub fn apply_energy_balance(
    spec: &Spectrum,
    mask: &FrequencyMask,
    gamma: f64,
) -> Result<(Spectrum, BalanceParams)> {
    check_gamma(gamma)?;
    let (e_total, e_low, e_high) = band_energies(spec, mask)?;
    let beta = compute_beta(e_total, e_low, gamma)?;
    let params = BalanceParams {
        gamma,
        beta,
        e_total,
        e_low,
        e_high,
        masked_bins: mask.resolved_count(),
    };
    Ok((scale_bands(spec, mask, 1.0 / gamma, beta), params))
}

/// Attenuates the masked band by `1/gamma` without compensating the rest
/// (`beta` fixed to 1). Energy drops to `1 - (E_low/E)(1 - 1/gamma^2)`.
pub fn apply_uncompensated(
    spec: &Spectrum,
    mask: &FrequencyMask,
    gamma: f64,
) -> Result<(Spectrum, BalanceParams)> {
    check_gamma(gamma)?;
    let (e_total, e_low, e_high) = band_energies(spec, mask)?;
    let params = BalanceParams {
        gamma,
        beta: 1.0,
        e_total,
        e_low,
        e_high,
        masked_bins: mask.resolved_count(),
    };
    Ok((scale_bands(spec, mask, 1.0 / gamma, 1.0), params))
}

/// Energy fraction left after uncompensated attenuation.
pub fn collapse_fraction(e_total: f64, e_low: f64, gamma: f64) -> f64 {
    1.0 - (e_low / e_total) * (1.0 - 1.0 / (gamma * gamma))
}
