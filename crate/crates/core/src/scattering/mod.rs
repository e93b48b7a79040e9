//! Stationary scattering on a quantum network.
//!
//! Each edge carries `psi(x) = A e^{ikx} + B e^{-ikx}`, each lead
//! `psi(x) = delta_{l,gamma} e^{-ikx} + s_{l,gamma} e^{ikx}` with `x` pointing
//! away from its vertex. Vertices impose a single common value of `psi` and
//! the Kirchhoff condition `sum of outward derivatives = delta_strength * psi`.

mod smatrix;
mod solver;

pub use smatrix::{coherent_current, reciprocity_defect, unitarity_defect, SMatrix};
pub use solver::{
    solve_scattering, solve_scattering_with, wavefunction_at, EdgeSolution, ScatteringSolution,
    SolverOptions,
};

use num_complex::Complex64;

use crate::network::NetworkError;

/// Default distance from a band edge below which the ansatz is refused.
pub const EPS_THRESHOLD: f64 = 1e-9;
/// Default 1-norm condition-number limit of the matching system.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("NEAR_THRESHOLD: E = {energy} is within {eps} of potential {potential}; shift E")]
    NearThreshold { energy: f64, potential: f64, eps: f64 },
    #[error("NONPOSITIVE_ENERGY: E = {0} must be positive (lead channels closed)")]
    NonpositiveEnergy(f64),
    #[error("SINGULAR_SYSTEM: condition number {condition:e} at E = {energy}; try offsetting E")]
    SingularSystem { energy: f64, condition: f64 },
    #[error("POSITION_OUT_OF_RANGE: x = {x} outside [0, {length}] on edge `{edge}`")]
    PositionOutOfRange { edge: String, x: f64, length: f64 },
    #[error("UNKNOWN_CHANNEL: no lead `{0}`")]
    UnknownChannel(String),
    #[error("UNKNOWN_EDGE: no edge `{0}`")]
    UnknownEdge(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

impl ScatteringError {
    pub fn code(&self) -> &'static str {
        match self {
            ScatteringError::NearThreshold { .. } => "NEAR_THRESHOLD",
            ScatteringError::NonpositiveEnergy(_) => "NONPOSITIVE_ENERGY",
            ScatteringError::SingularSystem { .. } => "SINGULAR_SYSTEM",
            ScatteringError::PositionOutOfRange { .. } => "POSITION_OUT_OF_RANGE",
            ScatteringError::UnknownChannel(_) => "UNKNOWN_CHANNEL",
            ScatteringError::UnknownEdge(_) => "UNKNOWN_EDGE",
            ScatteringError::Network(e) => e.code(),
        }
    }
}

/// Complex wavenumber on the physical branch: `Im k >= 0`, and `k > 0` when
/// propagating. Below the band edge `k = i kappa` with `kappa > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumber(pub Complex64);

impl Wavenumber {
    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn is_evanescent(self) -> bool {
        self.0.re == 0.0
    }
}

/// `k = sqrt(E - V)` on the physical branch.
pub fn wavenumber(energy: f64, potential: f64) -> Result<Wavenumber, ScatteringError> {
    wavenumber_eps(energy, potential, EPS_THRESHOLD)
}

pub fn wavenumber_eps(energy: f64, potential: f64, eps: f64) -> Result<Wavenumber, ScatteringError> {
    let d = energy - potential;
    if d.abs() < eps {
        return Err(ScatteringError::NearThreshold { energy, potential, eps });
    }
    Ok(if d > 0.0 {
        Wavenumber(Complex64::new(d.sqrt(), 0.0))
    } else {
        Wavenumber(Complex64::new(0.0, (-d).sqrt()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_rule() {
        assert_eq!(wavenumber(4.0, 0.0).unwrap().value(), Complex64::new(2.0, 0.0));
        let k = wavenumber(1.0, 4.0).unwrap();
        assert!(k.is_evanescent());
        assert!((k.value().im - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(wavenumber(2.0, 1.0).unwrap().value(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn threshold_refused() {
        let err = wavenumber(1.0, 1.0 + 1e-10).unwrap_err();
        assert_eq!(err.code(), "NEAR_THRESHOLD");
    }
}
