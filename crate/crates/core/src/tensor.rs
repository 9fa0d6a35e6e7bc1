//! Dense 4-D latent tensors and their complex spectra.
//!
//! Layout is row-major over `(t, w, h, d)`: frames vary slowest, channels
//! fastest. Every reduction walks the buffer once in that order so energies
//! are bit-reproducible.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logical shape of a latent: frames, width, height, channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub t: usize,
    pub w: usize,
    pub h: usize,
    pub d: usize,
}

impl Shape {
    pub fn new(t: usize, w: usize, h: usize, d: usize) -> Result<Self> {
        let shape = Shape { t, w, h, d };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 || self.w == 0 || self.h == 0 || self.d == 0 {
            return Err(Error::InvalidInput(format!(
                "all dimensions must be at least 1, got {self}"
            )));
        }
        self.t
            .checked_mul(self.w)
            .and_then(|n| n.checked_mul(self.h))
            .and_then(|n| n.checked_mul(self.d))
            .ok_or_else(|| Error::InvalidInput(format!("shape {self} overflows")))?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.t * self.w * self.h * self.d
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> [usize; 4] {
        [self.t, self.w, self.h, self.d]
    }

    #[inline]
    pub fn index(&self, t: usize, w: usize, h: usize, d: usize) -> usize {
        ((t * self.w + w) * self.h + h) * self.d + d
    }

    /// Inverse of [`Shape::index`].
    #[inline]
    pub fn coords(&self, flat: usize) -> (usize, usize, usize, usize) {
        let d = flat % self.d;
        let rest = flat / self.d;
        let h = rest % self.h;
        let rest = rest / self.h;
        let w = rest % self.w;
        (rest / self.w, w, h, d)
    }

    /// Parses `t,w,h,d`.
    pub fn parse(text: &str) -> Result<Self> {
        let dims = text
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidInput(format!("bad shape {text:?}: {e}")))?;
        match dims.as_slice() {
            &[t, w, h, d] => Shape::new(t, w, h, d),
            _ => Err(Error::InvalidInput(format!(
                "shape must have four comma-separated dims, got {text:?}"
            ))),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.t, self.w, self.h, self.d)
    }
}

/// Storage precision of a latent.
///
/// Values are always held as `f64`; an `F32` tensor only contains values
/// exactly representable in single precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

/// Which axes a spectrum was transformed along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// 1-D transform along frames, one per `(w, h, d)` column.
    Temporal,
    /// 2-D transform over `(w, h)`, one per `(t, d)` slice.
    Spatial,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Temporal => f.write_str("temporal"),
            Domain::Spatial => f.write_str("spatial"),
        }
    }
}

/// Scaling convention of a spectrum. Only the orthonormal DFT is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Normalization {
    /// Forward and inverse both scaled by `1/sqrt(N)`; energy is preserved exactly.
    #[default]
    Orthonormal,
}

/// A real latent or noise sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTensor {
    shape: Shape,
    data: Vec<f64>,
    precision: Precision,
}

impl LatentTensor {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        Self::with_precision(shape, data, Precision::F64)
    }

    /// Builds a tensor, rounding values to single precision when asked.
    pub fn with_precision(shape: Shape, mut data: Vec<f64>, precision: Precision) -> Result<Self> {
        shape.validate()?;
        if data.len() != shape.len() {
            return Err(Error::InvalidInput(format!(
                "data length {} does not match shape {shape} ({} elements)",
                data.len(),
                shape.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value {} at element {i}",
                data[i]
            )));
        }
        if precision == Precision::F32 {
            for v in &mut data {
                let narrow = *v as f32;
                if !narrow.is_finite() {
                    return Err(Error::InvalidInput(format!("{v} overflows f32")));
                }
                *v = f64::from(narrow);
            }
        }
        Ok(LatentTensor {
            shape,
            data,
            precision,
        })
    }

    pub fn zeros(shape: Shape) -> Result<Self> {
        shape.validate()?;
        Ok(LatentTensor {
            shape,
            data: vec![0.0; shape.len()],
            precision: Precision::F64,
        })
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Result<Self> {
        shape.validate()?;
        let mut data = Vec::with_capacity(shape.len());
        for t in 0..shape.t {
            for w in 0..shape.w {
                for h in 0..shape.h {
                    for d in 0..shape.d {
                        data.push(f(t, w, h, d));
                    }
                }
            }
        }
        Self::new(shape, data)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn get(&self, t: usize, w: usize, h: usize, d: usize) -> f64 {
        self.data[self.shape.index(t, w, h, d)]
    }

    /// Converts to the requested precision (rounding when narrowing).
    pub fn to_precision(&self, precision: Precision) -> Result<Self> {
        Self::with_precision(self.shape, self.data.clone(), precision)
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc + v * v)
    }

    /// Largest absolute element.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Complex spectrum in full (redundant) layout, same logical shape as its source.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    shape: Shape,
    data: Vec<Complex64>,
    domain: Domain,
    normalization: Normalization,
}

impl Spectrum {
    pub fn new(shape: Shape, data: Vec<Complex64>, domain: Domain) -> Result<Self> {
        shape.validate()?;
        if data.len() != shape.len() {
            return Err(Error::InvalidInput(format!(
                "spectrum length {} does not match shape {shape}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite spectrum value at bin {i}"
            )));
        }
        Ok(Spectrum {
            shape,
            data,
            domain,
            normalization: Normalization::Orthonormal,
        })
    }

    pub(crate) fn from_parts_unchecked(shape: Shape, data: Vec<Complex64>, domain: Domain) -> Self {
        debug_assert_eq!(data.len(), shape.len());
        Spectrum {
            shape,
            data,
            domain,
            normalization: Normalization::Orthonormal,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, c| acc + c.norm_sqr())
    }

    /// Largest bin modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    /// Flat index of the bin holding the negated frequency along the transformed axes.
    pub fn mirror_index(&self, flat: usize) -> usize {
        let s = self.shape;
        let (t, w, h, d) = s.coords(flat);
        match self.domain {
            Domain::Temporal => s.index((s.t - t) % s.t, w, h, d),
            Domain::Spatial => s.index(t, (s.w - w) % s.w, (s.h - h) % s.h, d),
        }
    }

    /// Largest deviation from conjugate symmetry, `max |X[f] - conj(X[-f])|`.
    pub fn hermitian_residual(&self) -> f64 {
        (0..self.data.len()).fold(0.0_f64, |m, i| {
            let j = self.mirror_index(i);
            m.max((self.data[i] - self.data[j].conj()).norm())
        })
    }
}

/// Anything with a sum-of-squares energy.
pub trait Energy {
    fn energy(&self) -> f64;
}

impl Energy for LatentTensor {
    fn energy(&self) -> f64 {
        LatentTensor::energy(self)
    }
}

impl Energy for Spectrum {
    fn energy(&self) -> f64 {
        Spectrum::energy(self)
    }
}

/// Energy of a finite tensor or spectrum; rejects non-finite input.
pub fn energy<E: Energy + ?Sized>(x: &E) -> Result<f64> {
    let e = x.energy();
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::InvalidInput("energy is not finite".into()))
    }
}

/// Magnitude and phase of a spectrum, bin by bin.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMag {
    shape: Shape,
    domain: Domain,
    magnitude: Vec<f64>,
    phase: Vec<f64>,
}

impl PhaseMag {
    pub fn new(shape: Shape, domain: Domain, magnitude: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        shape.validate()?;
        if magnitude.len() != shape.len() || phase.len() != shape.len() {
            return Err(Error::InvalidInput(
                "magnitude/phase length does not match shape".into(),
            ));
        }
        if let Some(m) = magnitude.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "magnitude must be finite and non-negative, got {m}"
            )));
        }
        if phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("non-finite phase".into()));
        }
        Ok(PhaseMag {
            shape,
            domain,
            magnitude,
            phase,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }
}

/// Phase of a single bin in `(-pi, pi]`; zero-magnitude bins have phase 0.
#[inline]
pub fn bin_phase(c: Complex64) -> f64 {
    if c.re == 0.0 && c.im == 0.0 {
        return 0.0;
    }
    let p = c.im.atan2(c.re);
    if p <= -PI {
        PI
    } else {
        p
    }
}

pub fn decompose(s: &Spectrum) -> Result<PhaseMag> {
    if s.data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite spectrum".into()));
    }
    let magnitude = s.data.iter().map(|c| c.norm()).collect();
    let phase = s.data.iter().map(|&c| bin_phase(c)).collect();
    Ok(PhaseMag {
        shape: s.shape,
        domain: s.domain,
        magnitude,
        phase,
    })
}

pub fn recompose(pm: &PhaseMag) -> Result<Spectrum> {
    if let Some(m) = pm.magnitude.iter().find(|m| !(**m >= 0.0)) {
        return Err(Error::InvalidInput(format!("negative magnitude {m}")));
    }
    let data = pm
        .magnitude
        .iter()
        .zip(&pm.phase)
        .map(|(&m, &p)| Complex64::from_polar(m, p))
        .collect();
    Spectrum::new(pm.shape, data, pm.domain)
}
