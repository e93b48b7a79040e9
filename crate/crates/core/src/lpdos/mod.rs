//! Local partial density of states.
//!
//! The LPDOS is
//! `rho(E, alpha, r, gamma) = -(1/2pi) |s_{alpha gamma}|^2 d theta_{alpha gamma} / dU(r)`,
//! where the functional derivative is discretized with a small rectangular
//! potential probe at `r`. Its sum over outgoing leads equals the
//! injectivity `|psi_gamma(r)|^2 / (h v)`, which is computed directly from
//! the wavefunction. The two routes are independent and are cross-checked
//! by [`sum_rule_residual`].

mod eq10;
mod local;
mod phase;
mod sensitivity;

pub use eq10::{eq10_pair, pair_from, Eq10Pair};
pub use local::{
    injectance, injectance_with, injectivity, sum_rule_residual, sum_rule_residual_over,
    InjectivitySample, QuadratureOptions,
};
pub use phase::{phase_step, unwrap_phase, unwrap_phase_eps, PhaseTrace, EPS_MAG};
pub use sensitivity::{
    lpdos, lpdos_all_channels, phase_sensitivity, LpdosSample, PhaseSensitivity, ProbeSettings,
};

use crate::network::NetworkError;
use crate::scattering::ScatteringError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LpdosError {
    #[error("MAGNITUDE_TOO_SMALL: |s| = {magnitude:e} at {context}; phase undefined, refine around the zero")]
    MagnitudeTooSmall { magnitude: f64, context: String },
    #[error("NONCONVERGED: Richardson discrepancy {discrepancy:e} exceeds 10% of value {value:e}")]
    Nonconverged { value: f64, discrepancy: f64 },
    #[error("INVALID_PROBE: {0}")]
    InvalidProbe(String),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

impl LpdosError {
    pub fn code(&self) -> &'static str {
        match self {
            LpdosError::MagnitudeTooSmall { .. } => "MAGNITUDE_TOO_SMALL",
            LpdosError::Nonconverged { .. } => "NONCONVERGED",
            LpdosError::InvalidProbe(_) => "INVALID_PROBE",
            LpdosError::Scattering(e) => e.code(),
            LpdosError::Network(e) => e.code(),
        }
    }
}
