//! Argand trajectories of S-matrix elements under a parameter sweep.
//!
//! A trajectory is sampled adaptively so that adjacent points are closer
//! than `delta_step` in the complex plane. Closed sub-loops are then
//! detected as returns of the curve to an earlier point, and the discrete
//! loop integrals of the phase and of `|s|^2` are evaluated on them.

mod loops;
mod scan;
mod sweep;

pub use loops::{
    detect_subloops, detect_subloops_with, loop_magnitude_integral, loop_phase_integral, trajectory_phase_change,
    winding_number, LoopOptions, SubLoop,
};
pub use scan::{eq10_scan, Eq10Options, Eq10Record, Eq10Scan, Eq10Summary};
pub use sweep::{
    sweep_parameter, sweep_wavenumber, trace, ArgandSample, ArgandTrajectory, Fixed, SweepOptions,
};

use crate::lpdos::LpdosError;
use crate::network::NetworkError;
use crate::scattering::ScatteringError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ArgandError {
    #[error("SUBDIVISION_CAP_EXCEEDED: interval [{lo}, {hi}] still has |ds| = {step:e} after {depth} bisections")]
    SubdivisionCapExceeded { lo: f64, hi: f64, step: f64, depth: u32 },
    #[error("ZERO_ON_LOOP: |s| = {magnitude:e} at sample {index}; winding about the origin undefined")]
    ZeroOnLoop { index: usize, magnitude: f64 },
    #[error("INVALID_RANGE: {0}")]
    InvalidRange(String),
    #[error(transparent)]
    Lpdos(#[from] LpdosError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

impl ArgandError {
    pub fn code(&self) -> &'static str {
        match self {
            ArgandError::SubdivisionCapExceeded { .. } => "SUBDIVISION_CAP_EXCEEDED",
            ArgandError::ZeroOnLoop { .. } => "ZERO_ON_LOOP",
            ArgandError::InvalidRange(_) => "INVALID_RANGE",
            ArgandError::Lpdos(e) => e.code(),
            ArgandError::Scattering(e) => e.code(),
            ArgandError::Network(e) => e.code(),
        }
    }
}
