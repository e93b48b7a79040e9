use std::f64::consts::PI;

use num_complex::Complex64;

use super::LpdosError;

/// Default magnitude below which a phase is considered undefined.
pub const EPS_MAG: f64 = 1e-12;

/// Phase step of `b` relative to `a`, in `(-pi, pi]`.
pub fn phase_step(a: Complex64, b: Complex64) -> f64 {
    let d = (b / a).arg();
    if d <= -PI {
        d + 2.0 * PI
    } else {
        d
    }
}

/// Continuous-branch argument of a sequence of complex values.
///
/// The first phase is the principal argument; each subsequent phase is the
/// previous one plus a step in `(-pi, pi]`.
pub fn unwrap_phase(values: &[Complex64]) -> Result<Vec<f64>, LpdosError> {
    unwrap_phase_eps(values, EPS_MAG)
}

pub fn unwrap_phase_eps(values: &[Complex64], eps_mag: f64) -> Result<Vec<f64>, LpdosError> {
    if let Some((i, z)) = values.iter().enumerate().find(|(_, z)| !(z.norm() > eps_mag)) {
        return Err(LpdosError::MagnitudeTooSmall { magnitude: z.norm(), context: format!("sample {i}") });
    }
    let mut out = Vec::with_capacity(values.len());
    let mut prev: Option<(Complex64, f64)> = None;
    for &z in values {
        let theta = match prev {
            None => z.arg(),
            Some((pz, pt)) => pt + phase_step(pz, z),
        };
        out.push(theta);
        prev = Some((z, theta));
    }
    Ok(out)
}

/// Unwrapped phase of an S-matrix element along a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrace {
    pub parameter_values: Vec<f64>,
    pub phases: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Set when some adjacent pair is a half turn apart, so the branch
    /// choice is ambiguous.
    pub undersampled: bool,
}

impl PhaseTrace {
    pub fn new(parameter_values: Vec<f64>, values: &[Complex64]) -> Result<Self, LpdosError> {
        assert_eq!(parameter_values.len(), values.len());
        let phases = unwrap_phase(values)?;
        let undersampled = phases.windows(2).any(|w| (w[1] - w[0]).abs() >= PI);
        Ok(PhaseTrace {
            parameter_values,
            magnitudes: values.iter().map(|z| z.norm()).collect(),
            phases,
            undersampled,
        })
    }

    /// Total phase change between the first and last samples.
    pub fn total_change(&self) -> f64 {
        match (self.phases.first(), self.phases.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}
