//! Stationary scattering on 1D quantum networks, local partial density of
//! states by functional differentiation of scattering phases, and Argand
//! sub-loop analysis of S-matrix elements under parameter sweeps.

pub mod argand;
pub mod exec;
pub mod io;
pub mod lpdos;
pub mod network;
pub mod scattering;
pub mod run;
pub mod units;
pub mod verify;

pub use num_complex::Complex64;
