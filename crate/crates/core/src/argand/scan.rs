use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ArgandError;
use crate::exec::par_map;
use crate::lpdos::{pair_from, EPS_MAG};
use crate::network::NetworkBuilder;
use crate::scattering::solve_scattering;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Eq10Options {
    /// Uniform k samples, endpoints included. Summary statistics use these.
    pub base_points: usize,
    /// Bisections of every interval where lhs or rhs changes sign.
    pub sign_refine_levels: u32,
    /// Bracket halvings around every local minimum of `|s|^2`.
    pub minimum_refine_levels: u32,
    pub eps_mag: f64,
    /// Records with `min(|s|, |s'|)` below this are flagged.
    pub flag_magnitude: f64,
    /// Records whose phase step exceeds this are flagged.
    pub flag_phase_step: f64,
}

impl Default for Eq10Options {
    fn default() -> Self {
        Eq10Options {
            base_points: 2001,
            sign_refine_levels: 20,
            minimum_refine_levels: 40,
            eps_mag: EPS_MAG,
            flag_magnitude: 1e-6,
            flag_phase_step: PI / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eq10Record {
    pub k: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `|s(u1)|^2`.
    pub mag2: f64,
    pub dtheta: f64,
    /// Near a zero of `s` or across a large phase step; excluded from
    /// sign counting and statistics.
    pub flag: bool,
    /// On the uniform base grid (not added by refinement).
    pub base: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eq10Summary {
    pub records: usize,
    pub flagged: usize,
    pub sign_changes_lhs: usize,
    pub sign_changes_rhs: usize,
    pub rms_difference: f64,
    pub pearson_full: f64,
    pub pearson_lower: f64,
    pub pearson_upper: f64,
    /// `rms(lhs - rhs) / max(rms lhs, rms rhs)` on each half of the k range.
    pub relative_discrepancy_lower: f64,
    pub relative_discrepancy_upper: f64,
    pub min_mag2: f64,
    pub k_at_min_mag2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eq10Scan {
    pub records: Vec<Eq10Record>,
    pub summary: Eq10Summary,
}

/// Compares `|s'|^2 - |s|^2` with `|s|^2 (theta' - theta)` over lead
/// wavenumbers `k` (`E = k^2`), where primed quantities use the parameter
/// `u1 + delta_u1`. Records are returned in increasing `k`.
#[allow(clippy::too_many_arguments)]
pub fn eq10_scan<B: NetworkBuilder + ?Sized>(
    builder: &B,
    k_range: (f64, f64),
    u1: f64,
    delta_u1: f64,
    alpha: &str,
    gamma: &str,
    opts: &Eq10Options,
) -> Result<Eq10Scan, ArgandError> {
    if !(delta_u1 != 0.0 && delta_u1.is_finite()) {
        return Err(ArgandError::InvalidRange(format!("delta_u1 = {delta_u1} must be finite and nonzero")));
    }
    let (k0, k1) = (k_range.0.min(k_range.1), k_range.0.max(k_range.1));
    if !(k0 > 0.0 && k1.is_finite() && k1 > k0) {
        return Err(ArgandError::InvalidRange(format!("k range [{k0}, {k1}] must be positive and nonempty")));
    }
    let net = builder.build(u1)?;
    let net_prime = builder.build(u1 + delta_u1)?;
    net.ensure_valid()?;
    let eval = |k: f64, base: bool| -> Result<Eq10Record, ArgandError> {
        let e = k * k;
        let s = solve_scattering(&net, e)?.smatrix.get(alpha, gamma)?;
        let sp = solve_scattering(&net_prime, e)?.smatrix.get(alpha, gamma)?;
        let small = s.norm().min(sp.norm());
        let p = if small > opts.eps_mag { pair_from(s, sp) } else { pair_from(s, sp).without_phase() };
        let flag = small < opts.flag_magnitude || p.dtheta.abs() > opts.flag_phase_step;
        Ok(Eq10Record { k, lhs: p.lhs, rhs: p.rhs, mag2: p.mag2, dtheta: p.dtheta, flag, base })
    };
    let eval_all = |ks: &[f64]| -> Result<Vec<Eq10Record>, ArgandError> {
        par_map(ks, |&k| eval(k, false)).into_iter().collect()
    };

    let n = opts.base_points.max(3);
    let grid: Vec<f64> =
        (0..n).map(|i| if i == n - 1 { k1 } else { k0 + (k1 - k0) * i as f64 / (n - 1) as f64 }).collect();
    let mut recs: Vec<Eq10Record> = par_map(&grid, |&k| eval(k, true)).into_iter().collect::<Result<_, _>>()?;

    // brackets (lo, mid, hi) around interior minima of |s|^2 on the base grid
    let mut brackets: Vec<(Eq10Record, Eq10Record, Eq10Record)> = recs
        .windows(3)
        .filter(|w| w[1].mag2 < w[0].mag2 && w[1].mag2 < w[2].mag2)
        .map(|w| (w[0], w[1], w[2]))
        .collect();
    let mut extra = Vec::new();
    for _ in 0..opts.minimum_refine_levels {
        let ks: Vec<f64> =
            brackets.iter().flat_map(|(a, m, b)| [0.5 * (a.k + m.k), 0.5 * (m.k + b.k)]).collect();
        let new = eval_all(&ks)?;
        for (br, pair) in brackets.iter_mut().zip(new.chunks(2)) {
            let (l, r) = (pair[0], pair[1]);
            let (a, m, b) = *br;
            *br = if l.mag2 < m.mag2 && l.mag2 <= r.mag2 {
                (a, l, m)
            } else if r.mag2 < m.mag2 {
                (m, r, b)
            } else {
                (l, m, r)
            };
            extra.push(l);
            extra.push(r);
        }
    }
    recs.extend(extra);
    sort_dedup(&mut recs);

    for _ in 0..opts.sign_refine_levels {
        let ks: Vec<f64> = recs
            .windows(2)
            .filter(|w| !w[0].flag && !w[1].flag)
            .filter(|w| w[0].lhs * w[1].lhs < 0.0 || w[0].rhs * w[1].rhs < 0.0)
            .map(|w| 0.5 * (w[0].k + w[1].k))
            .filter(|&k| recs.binary_search_by(|r| r.k.total_cmp(&k)).is_err())
            .collect();
        if ks.is_empty() {
            break;
        }
        recs.extend(eval_all(&ks)?);
        sort_dedup(&mut recs);
    }

    let summary = summarize(&recs, 0.5 * (k0 + k1));
    Ok(Eq10Scan { records: recs, summary })
}

fn sort_dedup(recs: &mut Vec<Eq10Record>) {
    recs.sort_by(|a, b| a.k.total_cmp(&b.k).then(b.base.cmp(&a.base)));
    recs.dedup_by(|b, a| a.k == b.k);
}

/// Strict alternations of sign, skipping exact zeros.
pub(crate) fn sign_changes(values: impl Iterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for v in values {
        if v == 0.0 || v.is_nan() {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    count
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return f64::NAN;
    }
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x * x;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

fn relative_discrepancy(recs: &[&Eq10Record]) -> f64 {
    let d = rms(recs.iter().map(|r| r.lhs - r.rhs));
    let scale = rms(recs.iter().map(|r| r.lhs)).max(rms(recs.iter().map(|r| r.rhs)));
    if scale > 0.0 {
        d / scale
    } else {
        0.0
    }
}

fn summarize(recs: &[Eq10Record], k_mid: f64) -> Eq10Summary {
    let good: Vec<&Eq10Record> = recs.iter().filter(|r| !r.flag).collect();
    let base: Vec<&Eq10Record> = good.iter().copied().filter(|r| r.base).collect();
    let lower: Vec<&Eq10Record> = base.iter().copied().filter(|r| r.k < k_mid).collect();
    let upper: Vec<&Eq10Record> = base.iter().copied().filter(|r| r.k >= k_mid).collect();
    let corr = |set: &[&Eq10Record]| {
        let x: Vec<f64> = set.iter().map(|r| r.lhs).collect();
        let y: Vec<f64> = set.iter().map(|r| r.rhs).collect();
        pearson(&x, &y)
    };
    let (min_mag2, k_at_min_mag2) =
        recs.iter().fold((f64::INFINITY, f64::NAN), |acc, r| if r.mag2 < acc.0 { (r.mag2, r.k) } else { acc });
    Eq10Summary {
        records: recs.len(),
        flagged: recs.len() - good.len(),
        sign_changes_lhs: sign_changes(good.iter().map(|r| r.lhs)),
        sign_changes_rhs: sign_changes(good.iter().map(|r| r.rhs)),
        rms_difference: rms(base.iter().map(|r| r.lhs - r.rhs)),
        pearson_full: corr(&base),
        pearson_lower: corr(&lower),
        pearson_upper: corr(&upper),
        relative_discrepancy_lower: relative_discrepancy(&lower),
        relative_discrepancy_upper: relative_discrepancy(&upper),
        min_mag2,
        k_at_min_mag2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Network, NetworkError, ThreeProngParams, ThreeProngU1, KSCAN_U1};

    fn small() -> Eq10Options {
        Eq10Options { base_points: 201, ..Default::default() }
    }

    #[test]
    fn free_wire_is_silent() {
        let b = |_u: f64| -> Result<Network, NetworkError> { Ok(Network::free_wire(1.3, 0.0)) };
        let scan = eq10_scan(&b, (0.5, 5.0), 0.0, 1.0, "2", "1", &small()).unwrap();
        for r in &scan.records {
            assert!(r.lhs.abs() < 1e-14 && r.rhs.abs() < 1e-14 && !r.flag);
        }
    }

    #[test]
    fn flipping_the_step_flips_both_series() {
        let b = ThreeProngU1(ThreeProngParams::default());
        let opts = Eq10Options { base_points: 41, sign_refine_levels: 0, minimum_refine_levels: 0, ..Default::default() };
        let d = 1e-3;
        let up = eq10_scan(&b, (1.0, 3.0), KSCAN_U1, d, "3", "1", &opts).unwrap();
        let down = eq10_scan(&b, (1.0, 3.0), KSCAN_U1, -d, "3", "1", &opts).unwrap();
        for (a, c) in up.records.iter().zip(&down.records) {
            assert_eq!(a.k, c.k);
            let scale = a.lhs.abs().max(a.rhs.abs());
            assert!((a.lhs + c.lhs).abs() <= 1e-2 * scale + 1e-12, "{a:?} {c:?}");
            assert!((a.rhs + c.rhs).abs() <= 1e-2 * scale + 1e-12, "{a:?} {c:?}");
        }
    }

    #[test]
    fn records_sorted_and_refined() {
        let b = ThreeProngU1(ThreeProngParams::default());
        let scan = eq10_scan(&b, (0.5, 4.0), KSCAN_U1, 1.0, "3", "1", &small()).unwrap();
        assert!(scan.records.windows(2).all(|w| w[0].k < w[1].k));
        assert!(scan.records.len() > 201);
        assert_eq!(scan.records.iter().filter(|r| r.base).count(), 201);
    }

    #[test]
    fn rejects_zero_step() {
        let b = ThreeProngU1(ThreeProngParams::default());
        assert_eq!(eq10_scan(&b, (1.0, 2.0), 1.0, 0.0, "3", "1", &small()).unwrap_err().code(), "INVALID_RANGE");
    }

    #[test]
    fn sign_change_counting() {
        assert_eq!(sign_changes([1.0, 0.0, 2.0, -1.0, 0.0, -3.0, 4.0].into_iter()), 2);
        assert_eq!(sign_changes(std::iter::empty()), 0);
    }

    #[test]
    fn pearson_limits() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &x) - 1.0).abs() < 1e-15);
        let y: Vec<f64> = x.iter().map(|v| -2.0 * v + 1.0).collect();
        assert!((pearson(&x, &y) + 1.0).abs() < 1e-15);
    }
}
