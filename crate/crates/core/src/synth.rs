//! Parameter-determined synthetic reference latents with known motion.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tensor::{LatentTensor, Shape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trajectory {
    /// Constant velocity in pixels per frame, starting at the frame centre.
    Linear { dx: f64, dy: f64 },
    /// Vertical bounce `y = cy + amplitude * sin(2 pi f / period)`. The
    /// fundamental dominates the temporal spectrum once the blob is wider
    /// than the amplitude; narrow blobs push energy into the harmonics.
    Oscillating { amplitude: f64, period: f64 },
}

impl Trajectory {
    fn position(&self, frame: usize, shape: Shape) -> (f64, f64) {
        let cx = (shape.w / 2) as f64;
        let cy = (shape.h / 2) as f64;
        let f = frame as f64;
        match *self {
            Trajectory::Linear { dx, dy } => (cx + f * dx, cy + f * dy),
            Trajectory::Oscillating { amplitude, period } => {
                (cx, cy + amplitude * (2.0 * PI * f / period).sin())
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Trajectory::Linear { dx, dy } if dx.is_finite() && dy.is_finite() => Ok(()),
            Trajectory::Oscillating { amplitude, period }
                if amplitude.is_finite() && period.is_finite() && period > 0.0 =>
            {
                Ok(())
            }
            other => Err(Error::InvalidTrajectory(format!("bad parameters {other:?}"))),
        }
    }
}

/// Signed offset on a ring of `n` pixels, in `(-n/2, n/2]`.
fn wrapped_delta(delta: f64, n: usize) -> f64 {
    let n = n as f64;
    let r = delta.rem_euclid(n);
    if r > n / 2.0 {
        r - n
    } else {
        r
    }
}

/// A Gaussian bump of width `sigma` following `trajectory`, identical across
/// channels. With `wrap` the frame is a torus and the bump re-enters on the
/// other side; without it the path must stay inside the frame.
pub fn gen_moving_blob(
    shape: Shape,
    trajectory: Trajectory,
    sigma: f64,
    wrap: bool,
) -> Result<LatentTensor> {
    shape.validate()?;
    trajectory.validate()?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidInput(format!("blob sigma must be positive, got {sigma}")));
    }
    let positions: Vec<(f64, f64)> = (0..shape.t).map(|f| trajectory.position(f, shape)).collect();
    if !wrap {
        let (wmax, hmax) = ((shape.w - 1) as f64, (shape.h - 1) as f64);
        if let Some((f, (x, y))) = positions
            .iter()
            .enumerate()
            .find(|(_, (x, y))| !(0.0..=wmax).contains(x) || !(0.0..=hmax).contains(y))
        {
            return Err(Error::InvalidTrajectory(format!(
                "blob at ({x}, {y}) leaves the {}x{} frame at frame {f}",
                shape.w, shape.h
            )));
        }
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    LatentTensor::from_fn(shape, |t, w, h, _| {
        let (x, y) = positions[t];
        let (mut ddx, mut ddy) = (w as f64 - x, h as f64 - y);
        if wrap {
            ddx = wrapped_delta(ddx, shape.w);
            ddy = wrapped_delta(ddy, shape.h);
        }
        (-(ddx * ddx + ddy * ddy) * inv).exp()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaticPattern {
    /// `+1` where `x + y` is even, `-1` elsewhere.
    Checker,
    /// `(x + y) / (w + h - 2)`, rising from 0 to 1 across the diagonal.
    Gradient,
}

/// A time-constant spatial pattern, identical across channels.
pub fn gen_static(shape: Shape, pattern: StaticPattern) -> Result<LatentTensor> {
    shape.validate()?;
    let span = (shape.w + shape.h).saturating_sub(2).max(1) as f64;
    LatentTensor::from_fn(shape, |_, w, h, _| match pattern {
        StaticPattern::Checker => {
            if (w + h) % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        }
        StaticPattern::Gradient => (w + h) as f64 / span,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Domain;
    use crate::transform::dft;

    /// Energy per temporal bin, summed over all columns.
    fn temporal_bin_energy(x: &LatentTensor) -> Vec<f64> {
        let s = dft(x, Domain::Temporal).unwrap();
        let shape = x.shape();
        let mut out = vec![0.0; shape.t];
        for (i, c) in s.data().iter().enumerate() {
            out[shape.coords(i).0] += c.norm_sqr();
        }
        out
    }

    #[test]
    fn static_blob_lives_at_dc() {
        let shape = Shape::new(8, 16, 16, 2).unwrap();
        let x = gen_moving_blob(shape, Trajectory::Linear { dx: 0.0, dy: 0.0 }, 2.0, true).unwrap();
        for t in 1..8 {
            for w in 0..16 {
                assert_eq!(x.get(t, w, 3, 1), x.get(0, w, 3, 0));
            }
        }
        let bins = temporal_bin_energy(&x);
        let total: f64 = bins.iter().sum();
        assert!(bins[0] >= 0.999 * total);
    }

    #[test]
    fn oscillation_peaks_at_fundamental() {
        for (t, period) in [(16, 4.0), (16, 8.0), (12, 6.0), (21, 7.0)] {
            let shape = Shape::new(t, 16, 16, 1).unwrap();
            let traj = Trajectory::Oscillating { amplitude: 2.0, period };
            let x = gen_moving_blob(shape, traj, 2.5, true).unwrap();
            let bins = temporal_bin_energy(&x);
            let peak = (1..=t / 2)
                .max_by(|&a, &b| bins[a].total_cmp(&bins[b]))
                .unwrap();
            assert_eq!(peak, t / period as usize, "t={t} period={period}");
        }
    }

    #[test]
    fn linear_wrap_is_circular_shift() {
        let shape = Shape::new(6, 10, 8, 2).unwrap();
        let x = gen_moving_blob(shape, Trajectory::Linear { dx: 1.0, dy: 0.0 }, 1.2, true).unwrap();
        for f in 0..6 {
            for w in 0..10 {
                for h in 0..8 {
                    let src = (w + 10 - f) % 10;
                    assert_eq!(x.get(f, w, h, 1), x.get(0, src, h, 0));
                }
            }
        }
    }

    #[test]
    fn leaving_the_frame_is_an_error() {
        let shape = Shape::new(8, 8, 8, 1).unwrap();
        let r = gen_moving_blob(shape, Trajectory::Linear { dx: 1.0, dy: 0.0 }, 1.0, false);
        assert!(matches!(r, Err(Error::InvalidTrajectory(_))));
        let r = gen_moving_blob(shape, Trajectory::Oscillating { amplitude: 2.0, period: 4.0 }, 1.0, false);
        assert!(r.is_ok());
        let r = gen_moving_blob(shape, Trajectory::Oscillating { amplitude: 1.0, period: 0.0 }, 1.0, true);
        assert!(matches!(r, Err(Error::InvalidTrajectory(_))));
    }

    #[test]
    fn checker_has_no_temporal_energy_off_dc() {
        let x = gen_static(Shape::new(5, 3, 7, 2).unwrap(), StaticPattern::Checker).unwrap();
        let bins = temporal_bin_energy(&x);
        assert!(bins[1..].iter().all(|&e| e < 1e-24));
    }

    #[test]
    fn gradient_dc_is_scaled_mean() {
        let x = gen_static(Shape::new(1, 4, 4, 1).unwrap(), StaticPattern::Gradient).unwrap();
        let mean = x.data().iter().sum::<f64>() / 16.0;
        let s = dft(&x, Domain::Spatial).unwrap();
        assert!((s.data()[0].re - 4.0 * mean).abs() < 1e-14);
        assert_eq!(s.data()[0].im, 0.0);
    }

    #[test]
    fn checker_peaks_at_nyquist_pair() {
        let shape = Shape::new(1, 8, 8, 1).unwrap();
        let x = gen_static(shape, StaticPattern::Checker).unwrap();
        let s = dft(&x, Domain::Spatial).unwrap();
        let peak = (0..s.data().len())
            .max_by(|&a, &b| s.data()[a].norm().total_cmp(&s.data()[b].norm()))
            .unwrap();
        assert_eq!(shape.coords(peak), (0, 4, 4, 0));
        assert!((s.data()[peak].norm() - 8.0).abs() < 1e-12);
    }
}
