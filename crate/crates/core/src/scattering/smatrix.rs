use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ScatteringError;
use crate::units::{E0, PLANCK};

/// Multi-lead S-matrix. `elements[(a, g)]` is the amplitude for scattering
/// from lead `channels[g]` into lead `channels[a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix {
    pub energy: f64,
    pub channels: Vec<String>,
    pub elements: DMatrix<Complex64>,
}

impl SMatrix {
    pub fn channel_index(&self, id: &str) -> Result<usize, ScatteringError> {
        self.channels
            .iter()
            .position(|c| c == id)
            .ok_or_else(|| ScatteringError::UnknownChannel(id.to_string()))
    }

    /// `s_{alpha gamma}` by lead id.
    pub fn get(&self, alpha: &str, gamma: &str) -> Result<Complex64, ScatteringError> {
        Ok(self.elements[(self.channel_index(alpha)?, self.channel_index(gamma)?)])
    }

    pub fn dim(&self) -> usize {
        self.channels.len()
    }
}

/// Max-norm of `S^dagger S - I`.
pub fn unitarity_defect(s: &SMatrix) -> f64 {
    let n = s.elements.nrows();
    let prod = s.elements.adjoint() * &s.elements;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - id).norm());
        }
    }
    worst
}

/// Max-norm of `S - S^T`.
pub fn reciprocity_defect(s: &SMatrix) -> f64 {
    let n = s.elements.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((s.elements[(i, j)] - s.elements[(j, i)]).norm());
        }
    }
    worst
}

/// Zero-temperature coherent current per unit energy, `(e0/h) |s_{alpha gamma}|^2`.
pub fn coherent_current(s: &SMatrix, alpha: &str, gamma: &str) -> Result<f64, ScatteringError> {
    Ok(E0 / PLANCK * s.get(alpha, gamma)?.norm_sqr())
}
