//! Conjugate-symmetric low-frequency selections.
//!
//! A temporal mask keeps the signed band `|f| <= k`. A spatial mask keeps
//! the innermost whole shells of the aspect-corrected radius
//! `sqrt((fx/w)^2 + (fy/h)^2)` until at least `ratio * w * h` bins are in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Domain, Shape, Spectrum};

/// How the low band was requested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cutoff {
    /// Signed temporal band half-width.
    K(usize),
    /// Fraction of spatial bins, in `(0, 1]`.
    Ratio(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMask {
    domain: Domain,
    /// `[t]` for temporal masks, `[w, h]` for spatial ones.
    dims: Vec<usize>,
    selected: Vec<bool>,
    cutoff: Cutoff,
    resolved_count: usize,
}

/// Signed frequency of index `i` on an axis of length `n`, in `(-n/2, n/2]`.
#[inline]
pub fn signed_frequency(i: usize, n: usize) -> i64 {
    if 2 * i <= n {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Exact squared radius scaled by `(w*h)^2`: `fx^2 h^2 + fy^2 w^2`.
#[inline]
pub(crate) fn radial_key(wi: usize, hi: usize, w: usize, h: usize) -> u128 {
    let fx = signed_frequency(wi, w).unsigned_abs() as u128;
    let fy = signed_frequency(hi, h).unsigned_abs() as u128;
    let (w, h) = (w as u128, h as u128);
    fx * fx * h * h + fy * fy * w * w
}

/// Normalized radius of a spatial bin.
pub fn radial_frequency(wi: usize, hi: usize, w: usize, h: usize) -> f64 {
    let fx = signed_frequency(wi, w) as f64 / w as f64;
    let fy = signed_frequency(hi, h) as f64 / h as f64;
    (fx * fx + fy * fy).sqrt()
}

/// Smallest bin count satisfying `count >= ratio * n`.
fn required_count(ratio: f64, n: usize) -> usize {
    let target = ratio * n as f64;
    // absorb representation error such as 0.07 * 100 = 7.000000000000001
    let count = (target - 1e-9 * n as f64).ceil();
    (count.max(1.0) as usize).min(n)
}

pub fn temporal_mask(t: usize, k: usize) -> Result<FrequencyMask> {
    if t == 0 {
        return Err(Error::InvalidInput("temporal length must be positive".into()));
    }
    if k == 0 || k > t / 2 {
        return Err(Error::InvalidCutoff(format!(
            "k must satisfy 1 <= k <= {} for t = {t}, got {k}",
            t / 2
        )));
    }
    let selected: Vec<bool> = (0..t)
        .map(|i| signed_frequency(i, t).unsigned_abs() as usize <= k)
        .collect();
    let resolved_count = selected.iter().filter(|&&s| s).count();
    Ok(FrequencyMask {
        domain: Domain::Temporal,
        dims: vec![t],
        selected,
        cutoff: Cutoff::K(k),
        resolved_count,
    })
}

pub fn radial_mask(w: usize, h: usize, ratio: f64) -> Result<FrequencyMask> {
    if w == 0 || h == 0 {
        return Err(Error::InvalidInput("spatial dims must be positive".into()));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidCutoff(format!(
            "ratio must lie in (0, 1], got {ratio}"
        )));
    }
    let n = w * h;
    let keys: Vec<u128> = (0..w)
        .flat_map(|wi| (0..h).map(move |hi| radial_key(wi, hi, w, h)))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    // the shell containing the needed-th smallest bin closes the disk
    let threshold = sorted[required_count(ratio, n) - 1];
    let selected: Vec<bool> = keys.iter().map(|&key| key <= threshold).collect();
    let resolved_count = selected.iter().filter(|&&s| s).count();
    Ok(FrequencyMask {
        domain: Domain::Spatial,
        dims: vec![w, h],
        selected,
        cutoff: Cutoff::Ratio(ratio),
        resolved_count,
    })
}

/// Builds the mask matching a domain and cutoff kind; mixing kinds is rejected.
pub fn mask_for(domain: Domain, shape: Shape, cutoff: Cutoff) -> Result<FrequencyMask> {
    match (domain, cutoff) {
        (Domain::Temporal, Cutoff::K(k)) => temporal_mask(shape.t, k),
        (Domain::Spatial, Cutoff::Ratio(r)) => radial_mask(shape.w, shape.h, r),
        (Domain::Temporal, Cutoff::Ratio(_)) => Err(Error::InvalidInput(
            "temporal conditioning takes an integer k, not a ratio".into(),
        )),
        (Domain::Spatial, Cutoff::K(_)) => Err(Error::InvalidInput(
            "spatial conditioning takes a ratio, not an integer k".into(),
        )),
    }
}

impl FrequencyMask {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn resolved_count(&self) -> usize {
        self.resolved_count
    }

    pub fn num_bins(&self) -> usize {
        self.selected.len()
    }

    /// Selection flags per bin: index `f` for temporal, `wi * h + hi` for spatial.
    pub fn selected(&self) -> &[bool] {
        &self.selected
    }

    pub fn is_selected(&self, bin: usize) -> bool {
        self.selected[bin]
    }

    /// Fraction of bins selected.
    pub fn fraction(&self) -> f64 {
        self.resolved_count as f64 / self.selected.len() as f64
    }

    /// Bin index of the negated frequency.
    pub fn mirror_bin(&self, bin: usize) -> usize {
        match *self.dims.as_slice() {
            [t] => (t - bin) % t,
            [w, h] => {
                let (wi, hi) = (bin / h, bin % h);
                ((w - wi) % w) * h + (h - hi) % h
            }
            _ => unreachable!("mask dims are one or two axes"),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.selected.len()).all(|b| self.selected[b] == self.selected[self.mirror_bin(b)])
    }

    /// Bin of a flat element index of a tensor with this shape.
    #[inline]
    pub fn bin_of(&self, shape: Shape, flat: usize) -> usize {
        let (t, w, h, _) = shape.coords(flat);
        match self.domain {
            Domain::Temporal => t,
            Domain::Spatial => w * shape.h + h,
        }
    }

    /// Per-element selection flags expanded over a full tensor shape.
    pub fn element_flags(&self, shape: Shape) -> Vec<bool> {
        (0..shape.len()).map(|i| self.selected[self.bin_of(shape, i)]).collect()
    }

    /// Checks the mask applies to the given shape.
    pub fn check_shape(&self, shape: Shape) -> Result<()> {
        let expected: &[usize] = match self.domain {
            Domain::Temporal => &[shape.t],
            Domain::Spatial => &[shape.w, shape.h],
        };
        if self.dims.as_slice() != expected {
            return Err(Error::InvalidInput(format!(
                "{} mask over {:?} does not fit shape {shape}",
                self.domain, self.dims
            )));
        }
        Ok(())
    }

    pub fn check_spectrum(&self, s: &Spectrum) -> Result<()> {
        if s.domain() != self.domain {
            return Err(Error::InvalidInput(format!(
                "{} mask applied to a {} spectrum",
                self.domain,
                s.domain()
            )));
        }
        self.check_shape(s.shape())
    }
}
