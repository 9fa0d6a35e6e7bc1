//! Orthonormal forward and inverse DFT along the temporal axis or the two
//! spatial axes of a latent.
//!
//! Both directions scale by `1/sqrt(N)` per transformed axis, so energy is
//! identical in both domains. The full complex layout is kept; the forward
//! transform of a real tensor is made exactly conjugate-symmetric, and the
//! inverse checks the imaginary residual before discarding it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::tensor::{Domain, LatentTensor, Shape, Spectrum};

/// Imaginary residual tolerated by [`idft`], relative to the largest bin modulus.
pub const IMAG_RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

/// Transforms every line along one axis, given its length and element stride.
fn transform_axis(data: &mut [Complex64], len: usize, stride: usize, direction: Direction) {
    if len == 1 {
        return;
    }
    let plan = FftPlan::new(len);
    let scale = 1.0 / (len as f64).sqrt();
    let block = len * stride;
    let mut line = vec![Complex64::new(0.0, 0.0); len];
    for outer in (0..data.len()).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = data[base + j * stride];
            }
            match direction {
                Direction::Forward => plan.forward(&mut line),
                Direction::Inverse => plan.inverse(&mut line),
            }
            for (j, v) in line.iter().enumerate() {
                data[base + j * stride] = v * scale;
            }
        }
    }
}

fn transform_domain(data: &mut [Complex64], shape: Shape, domain: Domain, direction: Direction) {
    match domain {
        Domain::Temporal => transform_axis(data, shape.t, shape.w * shape.h * shape.d, direction),
        Domain::Spatial => {
            transform_axis(data, shape.h, shape.d, direction);
            transform_axis(data, shape.w, shape.h * shape.d, direction);
        }
    }
}

/// Forward orthonormal DFT of a real latent.
pub fn dft(x: &LatentTensor, domain: Domain) -> Result<Spectrum> {
    let shape = x.shape();
    shape.validate()?;
    let mut data: Vec<Complex64> = x.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_domain(&mut data, shape, domain, Direction::Forward);
    let mut spectrum = Spectrum::from_parts_unchecked(shape, data, domain);
    enforce_hermitian(&mut spectrum);
    Ok(spectrum)
}

/// Averages each conjugate pair so `X[-f] == conj(X[f])` holds bit-exactly.
fn enforce_hermitian(s: &mut Spectrum) {
    for i in 0..s.data().len() {
        let j = s.mirror_index(i);
        let data = s.data_mut();
        if i == j {
            data[i].im = 0.0;
        } else if i < j {
            let (a, b) = (data[i], data[j]);
            let avg = Complex64::new(0.5 * (a.re + b.re), 0.5 * (a.im - b.im));
            data[i] = avg;
            data[j] = avg.conj();
        }
    }
}

/// Inverse transform that also reports the largest discarded imaginary part.
pub fn idft_with_residual(s: &Spectrum) -> Result<(LatentTensor, f64)> {
    let shape = s.shape();
    let mut data = s.data().to_vec();
    transform_domain(&mut data, shape, s.domain(), Direction::Inverse);
    let residual = data.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
    let threshold = IMAG_RESIDUAL_TOLERANCE * s.max_abs();
    if !(residual <= threshold) {
        return Err(Error::SymmetryViolation {
            residual,
            threshold,
        });
    }
    let real = LatentTensor::new(shape, data.into_iter().map(|c| c.re).collect())?;
    Ok((real, residual))
}

/// Inverse orthonormal DFT back to a real latent.
///
/// Fails with [`Error::SymmetryViolation`] when the spectrum is not close
/// enough to conjugate-symmetric for the result to be real.
pub fn idft(s: &Spectrum) -> Result<LatentTensor> {
    idft_with_residual(s).map(|(x, _)| x)
}
