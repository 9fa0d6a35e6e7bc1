//! Phase-conditioned diffusion noise.
//!
//! Gaussian noise is moved to the frequency domain (temporal or spatial),
//! the phase of its lowest frequencies is replaced with the phase of a
//! reference latent, the low band is attenuated by `1/gamma` while the rest
//! is rescaled by `beta` so total energy is unchanged, and the result is
//! transformed back. See [`pipeline::phi_noise`].

pub mod analysis;
pub mod balance;
pub mod cli;
pub mod error;
pub mod fft;
pub mod mask;
pub mod npy;
pub mod pipeline;
pub mod report;
pub mod synth;
pub mod tensor;
pub mod transform;

pub use balance::{apply_energy_balance, compute_beta, substitute_phase, BalanceParams};
pub use error::{Error, Result};
pub use mask::{radial_mask, temporal_mask, Cutoff, FrequencyMask};
pub use pipeline::{phi_noise, sample_noise, ConditioningConfig};
pub use tensor::{
    decompose, energy, recompose, Domain, Energy, LatentTensor, Normalization, PhaseMag,
    Precision, Shape, Spectrum,
};
pub use transform::{dft, idft};
