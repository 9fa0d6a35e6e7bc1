//! JSON reports written by the command-line tool.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{BandEnergy, WhitenessReport};
use crate::error::{Error, Result};
use crate::mask::Cutoff;
use crate::npy::write_atomic;
use crate::tensor::{Domain, Precision, Shape};

pub const REPORT_VERSION: u32 = 1;

/// Echo of the numeric parameters a run used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<Cutoff>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<Precision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    /// `"sampled"` or `"file"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bands: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    pub input: f64,
    pub output: Option<f64>,
    pub low: Option<f64>,
    pub high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub config: ConfigEcho,
    pub energies: Energies,
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_kl: Option<f64>,
    /// Phase divergence restricted to the masked band.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_kl_band: Option<f64>,
    pub whiteness: Option<WhitenessReport>,
    /// Whiteness after dividing each bin by its balancing scale.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub whiteness_rescaled: Option<WhitenessReport>,
    pub band_profile: Vec<BandEnergy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub gamma: f64,
    pub cutoff: Cutoff,
    pub output: String,
    pub report: Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: u32,
    pub config: ConfigEcho,
    pub runs: Vec<SweepRun>,
}

/// Per-run ledger in the fixture layout (`ledger.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub e_total: f64,
    pub e_low: f64,
    pub e_high: f64,
    pub beta: f64,
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::FormatError(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    write_atomic(path.as_ref(), text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(path.as_ref())?;
    serde_json::from_str(&text).map_err(|e| {
        Error::FormatError(format!("{}: {e}", path.as_ref().display()))
    })
}
