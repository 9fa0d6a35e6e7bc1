use std::io;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),

    /// The high band carries no energy, so no compensation factor exists.
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    /// The inverse transform left an imaginary residual above tolerance.
    #[error("symmetry violation: imaginary residual {residual:e} exceeds {threshold:e}")]
    SymmetryViolation { residual: f64, threshold: f64 },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("unsupported layout: {0}")]
    UnsupportedLayout(String),

    #[error("shape error: {0}")]
    ShapeError(String),

    #[error("format error: {0}")]
    FormatError(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::InvalidCutoff(_)
            | Error::InvalidTrajectory(_) => 2,
            Error::UnsupportedLayout(_)
            | Error::ShapeError(_)
            | Error::FormatError(_)
            | Error::Io(_) => 3,
            Error::DegenerateSpectrum(_) | Error::SymmetryViolation { .. } => 4,
        }
    }
}
