//! Test-only reference implementations. Nothing here calls the crate's FFT,
//! masks or balancing code: transforms are evaluated straight from the DFT
//! sum, and bins are enumerated by hand.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use phinoise::{Domain, LatentTensor, Shape};

/// SplitMix64, used to draw test inputs independently of the crate's sampler.
pub struct SplitMix(u64);

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.next_u64() % (hi_inclusive - lo + 1) as u64) as usize
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    pub fn tensor(&mut self, shape: Shape) -> LatentTensor {
        let data = (0..shape.len()).map(|_| self.normal()).collect();
        LatentTensor::new(shape, data).unwrap()
    }
}

fn cis(angle: f64) -> Complex64 {
    Complex64::new(angle.cos(), angle.sin())
}

fn idx(s: Shape, t: usize, w: usize, h: usize, d: usize) -> usize {
    ((t * s.w + w) * s.h + h) * s.d + d
}

/// Orthonormal DFT straight from the definition; `sign = -1` forward, `+1` inverse.
pub fn definitional_dft(x: &[Complex64], s: Shape, domain: Domain, sign: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
    match domain {
        Domain::Temporal => {
            let norm = 1.0 / (s.t as f64).sqrt();
            for w in 0..s.w {
                for h in 0..s.h {
                    for d in 0..s.d {
                        for f in 0..s.t {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for j in 0..s.t {
                                let angle = sign * 2.0 * PI * ((f * j) % s.t) as f64 / s.t as f64;
                                acc += x[idx(s, j, w, h, d)] * cis(angle);
                            }
                            out[idx(s, f, w, h, d)] = acc * norm;
                        }
                    }
                }
            }
        }
        Domain::Spatial => {
            let norm = 1.0 / ((s.w * s.h) as f64).sqrt();
            for t in 0..s.t {
                for d in 0..s.d {
                    for fx in 0..s.w {
                        for fy in 0..s.h {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for x0 in 0..s.w {
                                for y0 in 0..s.h {
                                    let a = ((fx * x0) % s.w) as f64 / s.w as f64
                                        + ((fy * y0) % s.h) as f64 / s.h as f64;
                                    acc += x[idx(s, t, x0, y0, d)] * cis(sign * 2.0 * PI * a);
                                }
                            }
                            out[idx(s, t, fx, fy, d)] = acc * norm;
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn real_to_complex(x: &LatentTensor) -> Vec<Complex64> {
    x.data().iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

pub fn oracle_spectrum(x: &LatentTensor, domain: Domain) -> Vec<Complex64> {
    definitional_dft(&real_to_complex(x), x.shape(), domain, -1.0)
}

/// Distance of signed frequency index `i` from zero on an axis of length `n`.
fn fold(i: usize, n: usize) -> usize {
    i.min(n - i)
}

/// Hand-enumerated low band: `|f| <= k` temporally, or the smallest set of
/// whole radius shells covering `ratio * w * h` bins spatially.
pub fn oracle_mask(s: Shape, domain: Domain, k: Option<usize>, ratio: Option<f64>) -> Vec<bool> {
    match domain {
        Domain::Temporal => {
            let k = k.expect("temporal oracle needs k");
            (0..s.t).map(|f| fold(f, s.t) <= k).collect()
        }
        Domain::Spatial => {
            let ratio = ratio.expect("spatial oracle needs ratio");
            // compare (fx/w)^2 + (fy/h)^2 exactly via a common denominator
            let r2 = |fx: usize, fy: usize| -> i128 {
                let (a, b) = (fold(fx, s.w) as i128, fold(fy, s.h) as i128);
                a * a * (s.h * s.h) as i128 + b * b * (s.w * s.w) as i128
            };
            let mut radii: Vec<i128> = (0..s.w).flat_map(|x| (0..s.h).map(move |y| (x, y))).map(|(x, y)| r2(x, y)).collect();
            radii.sort();
            let n = s.w * s.h;
            let mut needed = 1;
            while (needed as f64) < ratio * n as f64 - 1e-9 * n as f64 {
                needed += 1;
            }
            let cut = radii[needed.min(n) - 1];
            (0..s.w).flat_map(|x| (0..s.h).map(move |y| (x, y))).map(|(x, y)| r2(x, y) <= cut).collect()
        }
    }
}

fn element_bin(s: Shape, domain: Domain, i: usize) -> usize {
    let d_stride = s.d;
    let h = (i / d_stride) % s.h;
    let w = (i / (d_stride * s.h)) % s.w;
    let t = i / (d_stride * s.h * s.w);
    match domain {
        Domain::Temporal => t,
        Domain::Spatial => w * s.h + h,
    }
}

fn angle_of(c: Complex64) -> f64 {
    if c.norm() == 0.0 {
        0.0
    } else {
        c.im.atan2(c.re)
    }
}

pub struct OracleOutput {
    pub latent: Vec<f64>,
    pub e_total: f64,
    pub e_low: f64,
    pub e_high: f64,
    pub beta: f64,
    pub max_imag: f64,
}

/// Phase substitution, balancing and inverse transform, one bin at a time.
pub fn oracle_phi_noise(
    noise: &LatentTensor,
    reference: &LatentTensor,
    domain: Domain,
    k: Option<usize>,
    ratio: Option<f64>,
    gamma: f64,
    compensate: bool,
) -> OracleOutput {
    let s = noise.shape();
    let zs = oracle_spectrum(noise, domain);
    let vs = oracle_spectrum(reference, domain);
    let mask = oracle_mask(s, domain, k, ratio);
    let mut mixed = zs.clone();
    let (mut e_total, mut e_low, mut e_high) = (0.0, 0.0, 0.0);
    for i in 0..zs.len() {
        let low = mask[element_bin(s, domain, i)];
        if low {
            let m = zs[i].norm();
            mixed[i] = cis(angle_of(vs[i])) * m;
        }
        let e = mixed[i].norm_sqr();
        e_total += e;
        if low {
            e_low += e;
        } else {
            e_high += e;
        }
    }
    let beta = if compensate {
        ((e_total - e_low / (gamma * gamma)) / e_high).sqrt()
    } else {
        1.0
    };
    for i in 0..mixed.len() {
        let factor = if mask[element_bin(s, domain, i)] { 1.0 / gamma } else { beta };
        mixed[i] *= factor;
    }
    let back = definitional_dft(&mixed, s, domain, 1.0);
    OracleOutput {
        latent: back.iter().map(|c| c.re).collect(),
        e_total,
        e_low,
        e_high,
        beta,
        max_imag: back.iter().fold(0.0_f64, |m, c| m.max(c.im.abs())),
    }
}

/// Largest elementwise difference relative to the largest expected magnitude.
pub fn max_rel_diff(actual: &[f64], expected: &[f64]) -> f64 {
    assert_eq!(actual.len(), expected.len());
    let scale = expected.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    actual
        .iter()
        .zip(expected)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
        / scale
}

/// Absolute angular distance on the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}
