use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ArgandError;
use crate::exec::par_map;
use crate::lpdos::{phase_step, EPS_MAG};
use crate::network::{Network, NetworkBuilder};
use crate::scattering::solve_scattering;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    /// Upper bound on `|s_{n+1} - s_n|`.
    pub delta_step: f64,
    /// Uniform samples before refinement, endpoints included.
    pub initial_samples: usize,
    /// Bisections allowed on any one initial interval.
    pub max_depth: u32,
    pub eps_mag: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { delta_step: 0.02, initial_samples: 65, max_depth: 40, eps_mag: EPS_MAG }
    }
}

/// What is held fixed while the parameter varies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixed {
    Energy(f64),
    /// The network itself is fixed; the parameter is the lead wavenumber.
    Network,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArgandSample {
    pub param: f64,
    pub s: Complex64,
    /// Continuous-branch phase; `None` where `|s| <= eps_mag`. The branch
    /// restarts at the principal value after such a gap.
    pub theta: Option<f64>,
    pub mag2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgandTrajectory {
    pub alpha: String,
    pub gamma: String,
    pub parameter_name: String,
    pub fixed: Fixed,
    pub samples: Vec<ArgandSample>,
}

impl ArgandTrajectory {
    /// Builds a trajectory from already computed values, e.g. a synthetic
    /// curve.
    pub fn from_samples(params: &[f64], values: &[Complex64], eps_mag: f64) -> Self {
        assert_eq!(params.len(), values.len());
        let mut samples = Vec::with_capacity(values.len());
        let mut prev: Option<(Complex64, f64)> = None;
        for (&param, &s) in params.iter().zip(values) {
            let theta = if s.norm() > eps_mag {
                let t = match prev {
                    Some((ps, pt)) => pt + phase_step(ps, s),
                    None => s.arg(),
                };
                prev = Some((s, t));
                Some(t)
            } else {
                prev = None;
                None
            };
            samples.push(ArgandSample { param, s, theta, mag2: s.norm_sqr() });
        }
        ArgandTrajectory {
            alpha: String::new(),
            gamma: String::new(),
            parameter_name: "param".into(),
            fixed: Fixed::Network,
            samples,
        }
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.samples.iter().map(|s| s.s).collect()
    }

    pub fn params(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.param).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Largest `|s_{n+1} - s_n|`.
    pub fn max_step(&self) -> f64 {
        self.samples.windows(2).map(|w| (w[1].s - w[0].s).norm()).fold(0.0, f64::max)
    }
}

/// Samples `eval` over `range` (either direction) and bisects every interval
/// whose endpoints are `delta_step` or more apart. Evaluations run in
/// parallel one refinement level at a time.
pub fn trace<F>(eval: F, range: (f64, f64), opts: &SweepOptions) -> Result<Vec<(f64, Complex64)>, ArgandError>
where
    F: Fn(f64) -> Result<Complex64, ArgandError> + Sync + Send,
{
    let (a, b) = range;
    if !(a.is_finite() && b.is_finite()) || a == b {
        return Err(ArgandError::InvalidRange(format!("[{a}, {b}] must be finite and nonempty")));
    }
    if !(opts.delta_step > 0.0) {
        return Err(ArgandError::InvalidRange(format!("delta_step = {} must be positive", opts.delta_step)));
    }
    let n = opts.initial_samples.max(2);
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect();
    let values = par_map(&grid, |&p| eval(p)).into_iter().collect::<Result<Vec<_>, _>>()?;
    // (param, value, depth of the interval to the right)
    let mut pts: Vec<(f64, Complex64, u32)> = grid.into_iter().zip(values).map(|(p, v)| (p, v, 0)).collect();
    loop {
        let mut mids = Vec::new();
        for (i, w) in pts.windows(2).enumerate() {
            let step = (w[1].1 - w[0].1).norm();
            if step >= opts.delta_step {
                if w[0].2 >= opts.max_depth {
                    return Err(ArgandError::SubdivisionCapExceeded { lo: w[0].0, hi: w[1].0, step, depth: w[0].2 });
                }
                mids.push((i, 0.5 * (w[0].0 + w[1].0)));
            }
        }
        if mids.is_empty() {
            break;
        }
        let vals = par_map(&mids, |&(_, p)| eval(p)).into_iter().collect::<Result<Vec<_>, _>>()?;
        let mut next = Vec::with_capacity(pts.len() + mids.len());
        let mut m = 0;
        for (i, &pt) in pts.iter().enumerate() {
            if m < mids.len() && mids[m].0 == i {
                let depth = pt.2 + 1;
                next.push((pt.0, pt.1, depth));
                next.push((mids[m].1, vals[m], depth));
                m += 1;
            } else {
                next.push(pt);
            }
        }
        pts = next;
    }
    Ok(pts.into_iter().map(|(p, v, _)| (p, v)).collect())
}

/// `s_{alpha gamma}` of `builder(param)` at fixed `energy`, for `param`
/// running from `range.0` to `range.1`.
pub fn sweep_parameter<B: NetworkBuilder + ?Sized>(
    builder: &B,
    alpha: &str,
    gamma: &str,
    range: (f64, f64),
    energy: f64,
    opts: &SweepOptions,
) -> Result<ArgandTrajectory, ArgandError> {
    let eval = |p: f64| -> Result<Complex64, ArgandError> {
        let net = builder.build(p)?;
        Ok(solve_scattering(&net, energy)?.smatrix.get(alpha, gamma)?)
    };
    let pts = trace(eval, range, opts)?;
    Ok(finish(pts, alpha, gamma, builder.parameter_name(), Fixed::Energy(energy), opts))
}

/// `s_{alpha gamma}` of a fixed network against the lead wavenumber `k`
/// (`E = k^2`).
pub fn sweep_wavenumber(
    net: &Network,
    alpha: &str,
    gamma: &str,
    k_range: (f64, f64),
    opts: &SweepOptions,
) -> Result<ArgandTrajectory, ArgandError> {
    net.ensure_valid()?;
    let eval =
        |k: f64| -> Result<Complex64, ArgandError> { Ok(solve_scattering(net, k * k)?.smatrix.get(alpha, gamma)?) };
    let pts = trace(eval, k_range, opts)?;
    Ok(finish(pts, alpha, gamma, "k".into(), Fixed::Network, opts))
}

fn finish(
    pts: Vec<(f64, Complex64)>,
    alpha: &str,
    gamma: &str,
    parameter_name: String,
    fixed: Fixed,
    opts: &SweepOptions,
) -> ArgandTrajectory {
    let (params, values): (Vec<f64>, Vec<Complex64>) = pts.into_iter().unzip();
    let mut t = ArgandTrajectory::from_samples(&params, &values, opts.eps_mag);
    t.alpha = alpha.into();
    t.gamma = gamma.into();
    t.parameter_name = parameter_name;
    t.fixed = fixed;
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::EdgePotentialSweep;
    use std::f64::consts::PI;

    #[test]
    fn free_wire_unit_circle() {
        let l = 1.5;
        let net = Network::free_wire(l, 0.0);
        let t = sweep_wavenumber(&net, "2", "1", (1.0, 1.0 + 2.0 * PI / l), &SweepOptions::default()).unwrap();
        assert!(t.max_step() < 0.02);
        assert!(t.samples.iter().all(|s| (s.mag2 - 1.0).abs() < 1e-12));
        let th: Vec<f64> = t.samples.iter().map(|s| s.theta.unwrap()).collect();
        assert!(th.windows(2).all(|w| w[1] > w[0]));
        assert!((th.last().unwrap() - th[0] - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn monotone_both_directions() {
        let b = EdgePotentialSweep::new(Network::free_wire(1.0, 0.0), "w").unwrap();
        for range in [(-3.0, 0.5), (0.5, -3.0)] {
            let t = sweep_parameter(&b, "2", "1", range, 1.0, &SweepOptions::default()).unwrap();
            let p = t.params();
            assert_eq!((p[0], *p.last().unwrap()), range);
            let dir = (range.1 - range.0).signum();
            assert!(p.windows(2).all(|w| (w[1] - w[0]) * dir > 0.0));
        }
    }

    #[test]
    fn discontinuity_hits_the_cap() {
        let eval = |p: f64| Ok(if p < 0.3 { Complex64::new(1.0, 0.0) } else { Complex64::new(-1.0, 0.0) });
        let opts = SweepOptions { max_depth: 10, ..Default::default() };
        let err = trace(eval, (0.0, 1.0), &opts).unwrap_err();
        assert_eq!(err.code(), "SUBDIVISION_CAP_EXCEEDED");
        match err {
            ArgandError::SubdivisionCapExceeded { lo, hi, .. } => assert!(lo < 0.3 && hi >= 0.3),
            _ => unreachable!(),
        }
    }

    #[test]
    fn zero_marks_phase_gap() {
        let v = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)];
        let t = ArgandTrajectory::from_samples(&[0.0, 1.0, 2.0], &v, EPS_MAG);
        assert_eq!(t.samples[1].theta, None);
        assert_eq!(t.samples[2].theta, Some(PI / 2.0));
    }

    #[test]
    fn rejects_empty_range() {
        let eval = |_p: f64| Ok(Complex64::new(1.0, 0.0));
        assert_eq!(trace(eval, (1.0, 1.0), &SweepOptions::default()).unwrap_err().code(), "INVALID_RANGE");
    }
}
