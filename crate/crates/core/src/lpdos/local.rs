use serde::{Deserialize, Serialize};

use super::sensitivity::{lpdos_all_channels, ProbeSettings};
use super::LpdosError;
use crate::network::{Network, Position};
use crate::scattering::{solve_scattering, wavefunction_at, ScatteringSolution};
use crate::units::{group_velocity, PLANCK};

/// Injectivity `|psi_gamma(r)|^2 / (h v)` of lead `gamma` at `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivitySample {
    pub energy: f64,
    pub in_channel: String,
    pub position: Position,
    pub value: f64,
}

pub fn injectivity(net: &Network, energy: f64, pos: &Position, gamma: &str) -> Result<InjectivitySample, LpdosError> {
    let sol = solve_scattering(net, energy)?;
    injectivity_from(&sol, pos, gamma)
}

pub(crate) fn injectivity_from(
    sol: &ScatteringSolution,
    pos: &Position,
    gamma: &str,
) -> Result<InjectivitySample, LpdosError> {
    let energy = sol.smatrix.energy;
    let psi = wavefunction_at(sol, gamma, &pos.edge, pos.x)?;
    Ok(InjectivitySample {
        energy,
        in_channel: gamma.to_string(),
        position: pos.clone(),
        value: psi.norm_sqr() / (PLANCK * group_velocity(energy)),
    })
}

/// Relative mismatch `|sum_alpha rho(alpha) - nu| / max(nu, eps_mag)` between
/// the LPDOS summed over every outgoing lead and the injectivity.
///
/// Every amplitude `s_{alpha gamma}` must be resolvable; near a zero the
/// call fails with `MAGNITUDE_TOO_SMALL`.
pub fn sum_rule_residual(
    net: &Network,
    energy: f64,
    pos: &Position,
    gamma: &str,
    settings: &ProbeSettings,
) -> Result<f64, LpdosError> {
    sum_rule_residual_over(net, energy, pos, gamma, None, settings)
}

/// As [`sum_rule_residual`], summing only over `channels`. Dropping a
/// channel is only meaningful when its amplitude vanishes identically, as
/// for reflection on a uniform wire.
pub fn sum_rule_residual_over(
    net: &Network,
    energy: f64,
    pos: &Position,
    gamma: &str,
    channels: Option<&[&str]>,
    settings: &ProbeSettings,
) -> Result<f64, LpdosError> {
    let samples = lpdos_all_channels(net, energy, pos, gamma, settings)?;
    let mut total = 0.0;
    for (lead, s) in net.leads.iter().zip(samples) {
        if channels.is_none_or(|set| set.contains(&lead.id.as_str())) {
            total += s?.value;
        }
    }
    let nu = injectivity(net, energy, pos, gamma)?.value;
    Ok((total - nu).abs() / nu.max(settings.eps_mag))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureOptions {
    /// Initial Simpson panels per edge (rounded up to even).
    pub panels: usize,
    /// Stop doubling once the total changes by less than this.
    pub tolerance: f64,
    pub max_doublings: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { panels: 64, tolerance: 1e-8, max_doublings: 12 }
    }
}

/// Injectance of lead `gamma`: the injectivity integrated over every edge.
pub fn injectance(net: &Network, energy: f64, gamma: &str) -> Result<f64, LpdosError> {
    injectance_with(net, energy, gamma, &QuadratureOptions::default())
}

pub fn injectance_with(
    net: &Network,
    energy: f64,
    gamma: &str,
    opts: &QuadratureOptions,
) -> Result<f64, LpdosError> {
    let sol = solve_scattering(net, energy)?;
    let g = sol.smatrix.channel_index(gamma)?;
    let norm = PLANCK * group_velocity(energy);
    let simpson = |panels: usize| -> f64 {
        sol.edges
            .iter()
            .map(|e| {
                let h = e.length / panels as f64;
                let f = |i: usize| e.value(g, h * i as f64).norm_sqr();
                let mut acc = f(0) + f(panels);
                for i in 1..panels {
                    acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i);
                }
                acc * h / 3.0
            })
            .sum::<f64>()
            / norm
    };
    let mut panels = (opts.panels.max(2) + 1) & !1;
    let mut prev = simpson(panels);
    let mut total = prev;
    for _ in 0..opts.max_doublings {
        panels *= 2;
        let next = simpson(panels);
        // one Romberg step on top of Simpson
        total = next + (next - prev) / 15.0;
        let change = (next - prev).abs();
        prev = next;
        if change < opts.tolerance {
            break;
        }
    }
    Ok(total)
}
