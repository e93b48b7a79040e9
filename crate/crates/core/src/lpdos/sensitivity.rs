use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::phase::{phase_step, EPS_MAG};
use super::LpdosError;
use crate::network::{apply_perturbation, Network, PerturbationSpec, Position};
use crate::scattering::{solve_scattering_with, SMatrix, SolverOptions};

/// Finite-difference probe settings for `d theta / dU(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSettings {
    /// Probe height. `None` picks it so the coarse phase change is about
    /// `target_phase`.
    pub delta_u: Option<f64>,
    /// Coarse probe width. `None` uses `width_fraction * edge length`.
    pub width: Option<f64>,
    pub width_fraction: f64,
    pub target_phase: f64,
    pub eps_mag: f64,
    /// Relative Richardson discrepancy above which the derivative is
    /// reported as not converged.
    pub max_discrepancy: f64,
    #[serde(skip)]
    pub solver: SolverOptions,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings {
            delta_u: None,
            width: None,
            width_fraction: 0.01,
            target_phase: 1e-4,
            eps_mag: EPS_MAG,
            max_discrepancy: 0.1,
            solver: SolverOptions::default(),
        }
    }
}

/// Discretized functional derivative `d theta / dU(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSensitivity {
    /// Richardson-extrapolated value.
    pub value: f64,
    /// `|extrapolated - fine|`.
    pub richardson_error: f64,
    /// Central difference with the coarse probe `(delta_u, width)`.
    pub coarse: f64,
    /// Central difference with the fine probe `(delta_u, width / 2)`.
    pub fine: f64,
    pub delta_u: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpdosSample {
    pub energy: f64,
    pub out_channel: String,
    pub in_channel: String,
    pub position: Position,
    pub value: f64,
    pub richardson_error: f64,
    /// Coarse probe used (the fine probe has half the width).
    pub probe: PerturbationSpec,
}

struct ProbePair {
    plus: SMatrix,
    minus: SMatrix,
    delta_u: f64,
    width: f64,
}

fn probe_pair(
    net: &Network,
    energy: f64,
    pos: &Position,
    delta_u: f64,
    width: f64,
    solver: &SolverOptions,
) -> Result<ProbePair, LpdosError> {
    let solve = |du: f64| -> Result<SMatrix, LpdosError> {
        let p = PerturbationSpec { edge: pos.edge.clone(), center: pos.x, width, delta_u: du };
        let perturbed = apply_perturbation(net, &p)?;
        Ok(solve_scattering_with(&perturbed, energy, solver)?.smatrix)
    };
    Ok(ProbePair { plus: solve(delta_u)?, minus: solve(-delta_u)?, delta_u, width })
}

impl ProbePair {
    fn quotient(&self, a: usize, g: usize, eps: f64) -> Result<f64, LpdosError> {
        let sp = self.plus.elements[(a, g)];
        let sm = self.minus.elements[(a, g)];
        for (z, tag) in [(sp, "+dU"), (sm, "-dU")] {
            if !(z.norm() > eps) {
                return Err(LpdosError::MagnitudeTooSmall {
                    magnitude: z.norm(),
                    context: format!("probe {tag} (dU = {}, w = {})", self.delta_u, self.width),
                });
            }
        }
        Ok(phase_step(sm, sp) / (2.0 * self.delta_u * self.width))
    }
}

/// Solves the unperturbed system and the probe pairs once, then returns the
/// phase sensitivity of every requested outgoing channel for incident lead
/// `gamma`.
fn sensitivities(
    net: &Network,
    energy: f64,
    gamma: usize,
    pos: &Position,
    settings: &ProbeSettings,
    channels: &[usize],
) -> Result<(SMatrix, Vec<Result<PhaseSensitivity, LpdosError>>), LpdosError> {
    let base = solve_scattering_with(net, energy, &settings.solver)?.smatrix;
    let edge = net
        .edge(&pos.edge)
        .ok_or_else(|| crate::network::NetworkError::UnknownEdge(pos.edge.clone()))?;
    let width = settings.width.unwrap_or(settings.width_fraction * edge.length);
    PerturbationSpec { edge: pos.edge.clone(), center: pos.x, width, delta_u: 0.0 }.check(net)?;
    let eps = settings.eps_mag;

    let (coarse, delta_u) = match settings.delta_u {
        Some(h) if h == 0.0 || !h.is_finite() => {
            return Err(LpdosError::InvalidProbe(format!("delta_u = {h} must be finite and nonzero")))
        }
        Some(h) => (probe_pair(net, energy, pos, h, width, &settings.solver)?, h),
        None => {
            let h0 = settings.target_phase / width;
            let pilot = probe_pair(net, energy, pos, h0, width, &settings.solver)?;
            let scale = channels
                .iter()
                .filter(|&&a| base.elements[(a, gamma)].norm() > eps)
                .filter_map(|&a| pilot.quotient(a, gamma, eps).ok())
                .map(f64::abs)
                .fold(1.0, f64::max);
            if scale > 1.0 {
                let h = h0 / scale;
                (probe_pair(net, energy, pos, h, width, &settings.solver)?, h)
            } else {
                (pilot, h0)
            }
        }
    };
    let fine = probe_pair(net, energy, pos, delta_u, 0.5 * width, &settings.solver)?;

    let results = channels
        .iter()
        .map(|&a| {
            let z = base.elements[(a, gamma)];
            if !(z.norm() > eps) {
                return Err(LpdosError::MagnitudeTooSmall {
                    magnitude: z.norm(),
                    context: format!("E = {energy}, channel ({}, {})", base.channels[a], base.channels[gamma]),
                });
            }
            let d1 = coarse.quotient(a, gamma, eps)?;
            let d2 = fine.quotient(a, gamma, eps)?;
            let value = (4.0 * d2 - d1) / 3.0;
            let richardson_error = (value - d2).abs();
            // rounding floor of a phase difference over the fine probe strength
            let floor = 1e-13 / (delta_u.abs() * 0.5 * width);
            if richardson_error > settings.max_discrepancy * value.abs() + floor {
                return Err(LpdosError::Nonconverged { value, discrepancy: richardson_error });
            }
            Ok(PhaseSensitivity { value, richardson_error, coarse: d1, fine: d2, delta_u, width })
        })
        .collect();
    Ok((base, results))
}

/// `d theta_{alpha gamma} / dU(r)` by a central difference in the probe
/// height and one Richardson step that halves the probe width.
pub fn phase_sensitivity(
    net: &Network,
    energy: f64,
    alpha: &str,
    gamma: &str,
    pos: &Position,
    settings: &ProbeSettings,
) -> Result<PhaseSensitivity, LpdosError> {
    let a = lead(net, alpha)?;
    let g = lead(net, gamma)?;
    let (_, mut v) = sensitivities(net, energy, g, pos, settings, &[a])?;
    v.pop().expect("one channel requested")
}

/// LPDOS `-(1/2pi) |s_{alpha gamma}|^2 d theta_{alpha gamma} / dU(r)`. May be negative.
pub fn lpdos(
    net: &Network,
    energy: f64,
    alpha: &str,
    pos: &Position,
    gamma: &str,
    settings: &ProbeSettings,
) -> Result<LpdosSample, LpdosError> {
    let a = lead(net, alpha)?;
    let g = lead(net, gamma)?;
    let (base, mut v) = sensitivities(net, energy, g, pos, settings, &[a])?;
    let sens = v.pop().expect("one channel requested")?;
    Ok(sample(&base, a, g, pos, &sens))
}

/// LPDOS for every outgoing lead at once, sharing the probe solves.
pub fn lpdos_all_channels(
    net: &Network,
    energy: f64,
    pos: &Position,
    gamma: &str,
    settings: &ProbeSettings,
) -> Result<Vec<Result<LpdosSample, LpdosError>>, LpdosError> {
    let g = lead(net, gamma)?;
    let channels: Vec<usize> = (0..net.leads.len()).collect();
    let (base, v) = sensitivities(net, energy, g, pos, settings, &channels)?;
    Ok(v
        .into_iter()
        .enumerate()
        .map(|(a, r)| r.map(|sens| sample(&base, a, g, pos, &sens)))
        .collect())
}

fn sample(base: &SMatrix, a: usize, g: usize, pos: &Position, sens: &PhaseSensitivity) -> LpdosSample {
    let weight = base.elements[(a, g)].norm_sqr() / (2.0 * PI);
    LpdosSample {
        energy: base.energy,
        out_channel: base.channels[a].clone(),
        in_channel: base.channels[g].clone(),
        position: pos.clone(),
        value: -weight * sens.value,
        richardson_error: weight * sens.richardson_error,
        probe: PerturbationSpec {
            edge: pos.edge.clone(),
            center: pos.x,
            width: sens.width,
            delta_u: sens.delta_u,
        },
    }
}

fn lead(net: &Network, id: &str) -> Result<usize, LpdosError> {
    net.lead_index(id)
        .ok_or_else(|| crate::scattering::ScatteringError::UnknownChannel(id.to_string()).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_wire_sensitivity_is_minus_half_over_k() {
        let net = Network::free_wire(2.0, 0.0);
        for x in [0.3, 1.0, 1.7] {
            let s = phase_sensitivity(&net, 1.0, "2", "1", &Position::new("w", x), &ProbeSettings::default())
                .unwrap();
            assert!((s.value + 0.5).abs() < 1e-7, "x={x}: {s:?}");
        }
    }

    #[test]
    fn free_wire_lpdos() {
        let net = Network::free_wire(2.0, 0.0);
        let s = lpdos(&net, 1.0, "2", &Position::new("w", 0.8), "1", &ProbeSettings::default()).unwrap();
        assert!((s.value - 1.0 / (4.0 * PI)).abs() < 1e-7);
        assert!(s.richardson_error < 1e-8);
    }

    #[test]
    fn zero_delta_u_rejected() {
        let net = Network::free_wire(2.0, 0.0);
        let settings = ProbeSettings { delta_u: Some(0.0), ..Default::default() };
        let err = phase_sensitivity(&net, 1.0, "2", "1", &Position::new("w", 1.0), &settings).unwrap_err();
        assert_eq!(err.code(), "INVALID_PROBE");
    }

    #[test]
    fn zero_amplitude_refused() {
        // reflection on a free wire is exactly zero
        let net = Network::free_wire(2.0, 0.0);
        let err = lpdos(&net, 1.0, "1", &Position::new("w", 1.0), "1", &ProbeSettings::default()).unwrap_err();
        assert_eq!(err.code(), "MAGNITUDE_TOO_SMALL");
    }

    #[test]
    fn probe_errors_propagate() {
        let net = Network::free_wire(2.0, 0.0);
        let err = lpdos(&net, 1.0, "2", &Position::new("w", 0.005), "1", &ProbeSettings::default()).unwrap_err();
        assert_eq!(err.code(), "PROBE_OUT_OF_RANGE");
        let err = lpdos(&net, 1.0, "7", &Position::new("w", 1.0), "1", &ProbeSettings::default()).unwrap_err();
        assert_eq!(err.code(), "UNKNOWN_CHANNEL");
    }
}
