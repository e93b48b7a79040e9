//! Fixed unit system: hbar = 2m = e0 = 1.
//!
//! With these units the dispersion on an edge of potential `V` is
//! `E = k^2 + V`, the group velocity in a lead is `v = 2k`, and Planck's
//! constant is `h = 2 pi`.

use std::f64::consts::PI;

pub const HBAR: f64 = 1.0;
pub const TWO_M: f64 = 1.0;
pub const E0: f64 = 1.0;
pub const PLANCK: f64 = 2.0 * PI * HBAR;

/// Lead group velocity `v = 2 sqrt(E)`.
pub fn group_velocity(energy: f64) -> f64 {
    2.0 * HBAR * energy.sqrt() / TWO_M
}

/// One-line description written into every CSV header.
pub const UNITS_NOTE: &str = "hbar = 2m = e0 = 1, E = k^2 + V, v = 2k, h = 2pi";
