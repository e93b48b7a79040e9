use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phase::phase_step;
use super::LpdosError;
use crate::network::NetworkBuilder;
use crate::scattering::solve_scattering;

/// Both sides of `|s'|^2 - |s|^2 ~ -|s|^2 (theta - theta')` for two nearby
/// parameter values. No equality is implied: the relation is approximate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eq10Pair {
    pub lhs: f64,
    pub rhs: f64,
    pub mag2: f64,
    pub mag2_prime: f64,
    /// `theta' - theta`, taken as the principal step between the pair.
    pub dtheta: f64,
}

/// `lhs = |s(p')|^2 - |s(p)|^2`, `rhs = -|s(p)|^2 (theta(p) - theta(p'))`
/// for `s = s_{alpha gamma}` at energy `energy`.
pub fn eq10_pair<B: NetworkBuilder + ?Sized>(
    builder: &B,
    energy: f64,
    param: f64,
    param_prime: f64,
    alpha: &str,
    gamma: &str,
    eps_mag: f64,
) -> Result<Eq10Pair, LpdosError> {
    let element = |p: f64| -> Result<Complex64, LpdosError> {
        let net = builder.build(p)?;
        let sol = solve_scattering(&net, energy)?;
        Ok(sol.smatrix.get(alpha, gamma)?)
    };
    let s = element(param)?;
    let sp = if param_prime == param { s } else { element(param_prime)? };
    for (z, p) in [(s, param), (sp, param_prime)] {
        if !(z.norm() > eps_mag) {
            return Err(LpdosError::MagnitudeTooSmall {
                magnitude: z.norm(),
                context: format!("E = {energy}, parameter {p}"),
            });
        }
    }
    Ok(pair_from(s, sp))
}

impl Eq10Pair {
    /// The pair with the phase step dropped, for amplitudes too small to
    /// carry a phase.
    pub fn without_phase(self) -> Self {
        Eq10Pair { rhs: 0.0, dtheta: 0.0, ..self }
    }
}

/// Both sides from the two amplitudes. The phase step is taken as zero when
/// either amplitude vanishes.
pub fn pair_from(s: Complex64, sp: Complex64) -> Eq10Pair {
    let dtheta = if s.norm() > 0.0 && sp.norm() > 0.0 { phase_step(s, sp) } else { 0.0 };
    let mag2 = s.norm_sqr();
    let mag2_prime = sp.norm_sqr();
    Eq10Pair { lhs: mag2_prime - mag2, rhs: mag2 * dtheta, mag2, mag2_prime, dtheta }
}
