//! One-dimensional complex FFT for arbitrary lengths.
//!
//! Lengths whose prime factors are all small use a recursive mixed-radix
//! decimation-in-time Cooley-Tukey transform with generic radix-p
//! butterflies. A length with a prime factor above [`MAX_DIRECT_RADIX`] is
//! handled by Bluestein's chirp-z algorithm over a power-of-two transform.
//!
//! Transforms are unnormalized; scaling is the caller's business.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Largest prime radix done with an O(p^2) butterfly.
const MAX_DIRECT_RADIX: usize = 61;

#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    algorithm: Algorithm,
}

#[derive(Debug, Clone)]
enum Algorithm {
    Identity,
    MixedRadix {
        factors: Vec<usize>,
        twiddles: Vec<Complex64>,
    },
    Bluestein(Box<Bluestein>),
}

#[derive(Debug, Clone)]
struct Bluestein {
    inner: FftPlan,
    chirp: Vec<Complex64>,
    kernel_spectrum: Vec<Complex64>,
}

fn factorize(mut n: usize) -> Vec<usize> {
    let mut factors = Vec::new();
    while n.is_multiple_of(4) {
        factors.push(4);
        n /= 4;
    }
    while n.is_multiple_of(2) {
        factors.push(2);
        n /= 2;
    }
    let mut p = 3;
    while p * p <= n {
        while n.is_multiple_of(p) {
            factors.push(p);
            n /= p;
        }
        p += 2;
    }
    if n > 1 {
        factors.push(n);
    }
    factors
}

/// `exp(-2*pi*i*k/n)` for `k` in `0..n`.
fn forward_twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let angle = -2.0 * PI * (k as f64) / (n as f64);
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect()
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let algorithm = if len == 1 {
            Algorithm::Identity
        } else {
            let factors = factorize(len);
            if factors.iter().any(|&p| p > MAX_DIRECT_RADIX) {
                Algorithm::Bluestein(Box::new(Bluestein::new(len)))
            } else {
                Algorithm::MixedRadix {
                    factors,
                    twiddles: forward_twiddles(len),
                }
            }
        };
        FftPlan { len, algorithm }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform, `X[k] = sum_j x[j] exp(-2 pi i jk/n)`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        match &self.algorithm {
            Algorithm::Identity => {}
            Algorithm::MixedRadix { factors, twiddles } => {
                let input = buf.to_vec();
                mixed_radix(buf, &input, 0, 1, factors, twiddles);
            }
            Algorithm::Bluestein(b) => b.forward(buf),
        }
    }

    /// In-place unnormalized inverse transform.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        for c in buf.iter_mut() {
            *c = c.conj();
        }
        self.forward(buf);
        for c in buf.iter_mut() {
            *c = c.conj();
        }
    }
}

fn mixed_radix(
    out: &mut [Complex64],
    input: &[Complex64],
    offset: usize,
    stride: usize,
    factors: &[usize],
    twiddles: &[Complex64],
) {
    let p = factors[0];
    let m = out.len() / p;
    if m == 1 {
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = input[offset + j * stride];
        }
    } else {
        for (q, chunk) in out.chunks_exact_mut(m).enumerate() {
            mixed_radix(chunk, input, offset + q * stride, stride * p, &factors[1..], twiddles);
        }
    }
    butterfly(out, m, p, stride, twiddles);
}

/// Generic radix-p butterfly over `p` interleaved sub-transforms of length `m`.
fn butterfly(out: &mut [Complex64], m: usize, p: usize, stride: usize, twiddles: &[Complex64]) {
    let n = twiddles.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); p];
    for u in 0..m {
        for (q, s) in scratch.iter_mut().enumerate() {
            *s = out[u + q * m];
        }
        for q1 in 0..p {
            let k = u + q1 * m;
            let step = (stride * k) % n;
            let mut tw_index = 0;
            let mut acc = scratch[0];
            for s in &scratch[1..] {
                tw_index += step;
                if tw_index >= n {
                    tw_index -= n;
                }
                acc += s * twiddles[tw_index];
            }
            out[k] = acc;
        }
    }
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = FftPlan::new(m);
        let two_n = 2 * n as u128;
        // exp(-i pi k^2 / n) with k^2 reduced mod 2n to keep the angle small.
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let k2 = ((k as u128 * k as u128) % two_n) as f64;
                let angle = -PI * k2 / n as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.forward(&mut kernel);
        Bluestein {
            inner,
            chirp,
            kernel_spectrum: kernel,
        }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        let n = buf.len();
        let m = self.inner.len();
        let mut work = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..n {
            work[k] = buf[k] * self.chirp[k];
        }
        self.inner.forward(&mut work);
        for (w, k) in work.iter_mut().zip(&self.kernel_spectrum) {
            *w *= k;
        }
        self.inner.inverse(&mut work);
        let scale = 1.0 / m as f64;
        for k in 0..n {
            buf[k] = work[k] * self.chirp[k] * scale;
        }
    }
}
