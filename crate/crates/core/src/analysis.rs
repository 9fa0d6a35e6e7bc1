//! Diagnostics for conditioned noise: phase-histogram divergence, radial or
//! temporal band energy, and Gaussian whiteness checks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{radial_frequency, signed_frequency, FrequencyMask};
use crate::tensor::{bin_phase, Domain, LatentTensor, Spectrum};
use crate::transform::dft;

/// Verdict threshold on every whiteness z-score.
pub const WHITENESS_Z_LIMIT: f64 = 4.0;

/// Counts phases into `bins` equal buckets over `(-pi, pi]`.
pub fn phase_histogram(phases: impl IntoIterator<Item = f64>, bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    let width = 2.0 * PI / bins as f64;
    for phi in phases {
        let pos = ((phi + PI) / width).ceil() as isize - 1;
        counts[pos.clamp(0, bins as isize - 1) as usize] += 1;
    }
    counts
}

/// `KL(P || Q)` between two histograms after add-one smoothing.
pub fn smoothed_kl(p_counts: &[u64], q_counts: &[u64]) -> f64 {
    let bins = p_counts.len() as f64;
    let p_total = p_counts.iter().sum::<u64>() as f64 + bins;
    let q_total = q_counts.iter().sum::<u64>() as f64 + bins;
    let kl = p_counts
        .iter()
        .zip(q_counts)
        .map(|(&pc, &qc)| {
            let p = (pc as f64 + 1.0) / p_total;
            let q = (qc as f64 + 1.0) / q_total;
            p * (p / q).ln()
        })
        .sum::<f64>();
    kl.max(0.0)
}

fn nonzero_spectrum(x: &LatentTensor, domain: Domain) -> Result<Spectrum> {
    if x.data().iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSpectrum(
            "phase distribution of an all-zero tensor is undefined".into(),
        ));
    }
    dft(x, domain)
}

fn check_bins(bins: usize) -> Result<()> {
    if bins < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 histogram bins, got {bins}")));
    }
    Ok(())
}

/// Divergence between the phase distributions of the spectra of `a` and `b`.
pub fn phase_kl(a: &LatentTensor, b: &LatentTensor, domain: Domain, bins: usize) -> Result<f64> {
    check_bins(bins)?;
    let sa = nonzero_spectrum(a, domain)?;
    let sb = nonzero_spectrum(b, domain)?;
    let ha = phase_histogram(sa.data().iter().map(|&c| bin_phase(c)), bins);
    let hb = phase_histogram(sb.data().iter().map(|&c| bin_phase(c)), bins);
    Ok(smoothed_kl(&ha, &hb))
}

/// Like [`phase_kl`] but only over the bins a mask selects.
pub fn phase_kl_in_band(
    a: &LatentTensor,
    b: &LatentTensor,
    mask: &FrequencyMask,
    bins: usize,
) -> Result<f64> {
    check_bins(bins)?;
    let histogram = |x: &LatentTensor| -> Result<Vec<u64>> {
        mask.check_shape(x.shape())?;
        let s = nonzero_spectrum(x, mask.domain())?;
        let shape = s.shape();
        let phases = s
            .data()
            .iter()
            .enumerate()
            .filter(|(i, _)| mask.is_selected(mask.bin_of(shape, *i)))
            .map(|(_, &c)| bin_phase(c));
        Ok(phase_histogram(phases, bins))
    };
    Ok(smoothed_kl(&histogram(a)?, &histogram(b)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandEnergy {
    pub label: String,
    /// Normalized frequency range `[lower, upper)`; the last band is closed.
    pub lower: f64,
    pub upper: f64,
    /// Number of spectrum elements falling in the band.
    pub elements: usize,
    pub mean_energy: f64,
}

/// Normalized frequency of each bin: `|f|/t` temporally, aspect-corrected radius spatially.
fn bin_radii(domain: Domain, x: &LatentTensor) -> Vec<f64> {
    let s = x.shape();
    match domain {
        Domain::Temporal => (0..s.t)
            .map(|f| signed_frequency(f, s.t).unsigned_abs() as f64 / s.t as f64)
            .collect(),
        Domain::Spatial => (0..s.w)
            .flat_map(|wi| (0..s.h).map(move |hi| radial_frequency(wi, hi, s.w, s.h)))
            .collect(),
    }
}

/// Mean `|X|^2` over `n_bands` equal-width shells of normalized frequency.
pub fn band_energy_profile(
    x: &LatentTensor,
    domain: Domain,
    n_bands: usize,
) -> Result<Vec<BandEnergy>> {
    if n_bands == 0 {
        return Err(Error::InvalidInput("need at least one band".into()));
    }
    let spectrum = dft(x, domain)?;
    let radii = bin_radii(domain, x);
    let max_radius = radii.iter().cloned().fold(0.0_f64, f64::max);
    let band_of = |r: f64| -> usize {
        if max_radius == 0.0 {
            0
        } else {
            ((r / max_radius * n_bands as f64).floor() as usize).min(n_bands - 1)
        }
    };
    let shape = x.shape();
    let mut sums = vec![0.0; n_bands];
    let mut counts = vec![0usize; n_bands];
    for (i, c) in spectrum.data().iter().enumerate() {
        let (t, w, h, _) = shape.coords(i);
        let bin = match domain {
            Domain::Temporal => t,
            Domain::Spatial => w * shape.h + h,
        };
        let band = band_of(radii[bin]);
        sums[band] += c.norm_sqr();
        counts[band] += 1;
    }
    Ok((0..n_bands)
        .map(|b| {
            let lower = max_radius * b as f64 / n_bands as f64;
            let upper = max_radius * (b + 1) as f64 / n_bands as f64;
            BandEnergy {
                label: format!("[{lower:.4}, {upper:.4}{}", if b + 1 == n_bands { "]" } else { ")" }),
                lower,
                upper,
                elements: counts[b],
                mean_energy: if counts[b] == 0 { 0.0 } else { sums[b] / counts[b] as f64 },
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitenessReport {
    pub elements: usize,
    pub mean: f64,
    pub variance: f64,
    pub excess_kurtosis: f64,
    pub z_mean: f64,
    pub z_variance: f64,
    pub z_kurtosis: f64,
    pub flatness_domain: Domain,
    pub z_flatness: f64,
    pub moments_pass: bool,
    pub flatness_pass: bool,
    pub pass: bool,
}

/// Tests `x` against i.i.d. standard normal noise.
///
/// Moment z-scores use the null `N(0, 1)`. Flatness pools a chi-square over
/// one representative of each conjugate bin pair, comparing each bin's mean
/// power with the overall mean. The temporal spectrum is used when `t >= 2`.
pub fn whiteness_report(x: &LatentTensor) -> Result<WhitenessReport> {
    let domain = if x.shape().t >= 2 {
        Domain::Temporal
    } else {
        Domain::Spatial
    };
    whiteness_report_scaled(x, domain, None)
}

/// Whiteness with the flatness check run on `domain` after dividing each
/// bin's power by `bin_scale` (indexed like [`FrequencyMask::selected`]).
pub fn whiteness_report_scaled(
    x: &LatentTensor,
    domain: Domain,
    bin_scale: Option<&[f64]>,
) -> Result<WhitenessReport> {
    let n = x.data().len();
    if n < 64 {
        return Err(Error::InvalidInput(format!(
            "whiteness needs at least 64 elements, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = x.data().iter().sum::<f64>() / nf;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &v in x.data() {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m4 /= nf;
    let excess_kurtosis = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 };
    let z_mean = mean * nf.sqrt();
    let z_variance = (m2 - 1.0) / (2.0 / nf).sqrt();
    let z_kurtosis = excess_kurtosis / (24.0 / nf).sqrt();
    let z_flatness = flatness_z(x, domain, bin_scale)?;
    let moments_pass = [z_mean, z_variance, z_kurtosis]
        .iter()
        .all(|z| z.abs() <= WHITENESS_Z_LIMIT);
    let flatness_pass = z_flatness.abs() <= WHITENESS_Z_LIMIT;
    Ok(WhitenessReport {
        elements: n,
        mean,
        variance: m2,
        excess_kurtosis,
        z_mean,
        z_variance,
        z_kurtosis,
        flatness_domain: domain,
        z_flatness,
        moments_pass,
        flatness_pass,
        pass: moments_pass && flatness_pass,
    })
}

fn flatness_z(x: &LatentTensor, domain: Domain, bin_scale: Option<&[f64]>) -> Result<f64> {
    let shape = x.shape();
    let (n_bins, per_bin) = match domain {
        Domain::Temporal => (shape.t, shape.w * shape.h * shape.d),
        Domain::Spatial => (shape.w * shape.h, shape.t * shape.d),
    };
    if let Some(scale) = bin_scale {
        if scale.len() != n_bins || scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "bin scale must hold {n_bins} positive values"
            )));
        }
    }
    let spectrum = dft(x, domain)?;
    let mut power = vec![0.0; n_bins];
    for (i, c) in spectrum.data().iter().enumerate() {
        let (t, w, h, _) = shape.coords(i);
        let bin = match domain {
            Domain::Temporal => t,
            Domain::Spatial => w * shape.h + h,
        };
        power[bin] += c.norm_sqr();
    }
    for (b, p) in power.iter_mut().enumerate() {
        *p /= per_bin as f64;
        if let Some(scale) = bin_scale {
            *p /= scale[b];
        }
    }
    let pooled = power.iter().sum::<f64>() / n_bins as f64;
    if pooled == 0.0 {
        // a constant-zero spectrum is as far from white as it gets
        return Ok(f64::INFINITY);
    }
    let mirror = |b: usize| -> usize {
        match domain {
            Domain::Temporal => (shape.t - b) % shape.t,
            Domain::Spatial => {
                let (wi, hi) = (b / shape.h, b % shape.h);
                ((shape.w - wi) % shape.w) * shape.h + (shape.h - hi) % shape.h
            }
        }
    };
    let mut q = 0.0;
    let mut classes = 0usize;
    for b in 0..n_bins {
        let m = mirror(b);
        if m < b {
            continue;
        }
        let var = if m == b { 2.0 } else { 1.0 };
        let z = (power[b] - pooled) / (pooled * (var / per_bin as f64).sqrt());
        q += z * z;
        classes += 1;
    }
    let c = classes as f64;
    Ok((q - c) / (2.0 * c).sqrt())
}
