use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ArgandError, ArgandTrajectory};
use crate::lpdos::{phase_step, EPS_MAG};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopOptions {
    /// Minimum number of samples between the two ends of a loop.
    pub n_min: usize,
    /// Allowed closure gap as a fraction of the loop diameter.
    pub closure_fraction: f64,
    pub eps_mag: f64,
}

impl Default for LoopOptions {
    fn default() -> Self {
        LoopOptions { n_min: 16, closure_fraction: 1e-2, eps_mag: EPS_MAG }
    }
}

/// A closed stretch `start_index ..= end_index` of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubLoop {
    pub start_index: usize,
    pub end_index: usize,
    /// `|s_end - s_start|`.
    pub closure_gap: f64,
    /// Largest distance of a loop sample from `s_start`. Never exceeds the
    /// true diameter, so `closure_gap / diameter` is conservative.
    pub diameter: f64,
    /// `None` when the loop touches `|s| <= eps_mag`.
    pub winding: Option<i64>,
    pub phase_integral: Option<f64>,
    pub magnitude_integral: f64,
}

impl SubLoop {
    /// A loop over the given index range with all integrals evaluated.
    pub fn new(traj: &ArgandTrajectory, start_index: usize, end_index: usize, eps_mag: f64) -> Self {
        assert!(start_index <= end_index && end_index < traj.len());
        let s = &traj.samples;
        let a = s[start_index].s;
        let diameter = s[start_index..=end_index].iter().map(|x| (x.s - a).norm()).fold(0.0, f64::max);
        let mut l = SubLoop {
            start_index,
            end_index,
            closure_gap: (s[end_index].s - a).norm(),
            diameter,
            winding: None,
            phase_integral: None,
            magnitude_integral: 0.0,
        };
        l.magnitude_integral = loop_magnitude_integral(&l, traj);
        if let Ok(p) = closed_phase_sum(traj, start_index, end_index, eps_mag) {
            l.phase_integral = Some(p);
            l.winding = Some((p / (2.0 * PI)).round() as i64);
        }
        l
    }

    pub fn len(&self) -> usize {
        self.end_index - self.start_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn closed_phase_sum(traj: &ArgandTrajectory, i: usize, j: usize, eps: f64) -> Result<f64, ArgandError> {
    let s = &traj.samples[i..=j];
    if let Some((k, x)) = s.iter().enumerate().find(|(_, x)| !(x.s.norm() > eps)) {
        return Err(ArgandError::ZeroOnLoop { index: i + k, magnitude: x.s.norm() });
    }
    let open: f64 = s.windows(2).map(|w| phase_step(w[0].s, w[1].s)).sum();
    Ok(open + phase_step(s[s.len() - 1].s, s[0].s))
}

/// `round(sum of arg steps / 2pi)` around the loop closed by the chord from
/// its last sample back to its first.
pub fn winding_number(l: &SubLoop, traj: &ArgandTrajectory) -> Result<i64, ArgandError> {
    Ok((loop_phase_integral(l, traj)? / (2.0 * PI)).round() as i64)
}

/// Sum of phase steps around the closed loop, each in `(-pi, pi]`.
pub fn loop_phase_integral(l: &SubLoop, traj: &ArgandTrajectory) -> Result<f64, ArgandError> {
    closed_phase_sum(traj, l.start_index, l.end_index, EPS_MAG)
}

/// Sum of `|s|^2` increments along the loop, without the closing chord.
pub fn loop_magnitude_integral(l: &SubLoop, traj: &ArgandTrajectory) -> f64 {
    traj.samples[l.start_index..=l.end_index].windows(2).map(|w| w[1].mag2 - w[0].mag2).sum()
}

/// Open sum of phase steps over the whole trajectory.
pub fn trajectory_phase_change(traj: &ArgandTrajectory) -> Result<f64, ArgandError> {
    let s = &traj.samples;
    if let Some((k, x)) = s.iter().enumerate().find(|(_, x)| !(x.s.norm() > EPS_MAG)) {
        return Err(ArgandError::ZeroOnLoop { index: k, magnitude: x.s.norm() });
    }
    Ok(s.windows(2).map(|w| phase_step(w[0].s, w[1].s)).sum())
}

pub fn detect_subloops(traj: &ArgandTrajectory) -> Vec<SubLoop> {
    detect_subloops_with(traj, &LoopOptions::default())
}

/// Closed sub-loops in sweep order.
///
/// Within a stretch of the trajectory, the sample the curve returns to most
/// often is taken as the closure point; the loops are the consecutive first
/// returns chained from it. The stretches before the first and after the
/// last closure are searched the same way, so loops never overlap.
pub fn detect_subloops_with(traj: &ArgandTrajectory, opts: &LoopOptions) -> Vec<SubLoop> {
    let pts = traj.values();
    if pts.len() < opts.n_min + 1 {
        return Vec::new();
    }
    let finder = ReturnFinder::new(&pts, opts);
    let mut out = Vec::new();
    finder.segment(0, pts.len(), &mut out);
    out.sort_by_key(|&(i, _)| i);
    out.into_iter().map(|(i, j)| SubLoop::new(traj, i, j, opts.eps_mag)).collect()
}

struct ReturnFinder<'a> {
    pts: &'a [Complex64],
    opts: &'a LoopOptions,
    /// Samples with some later sample close enough to be a return, together
    /// with the last such index.
    candidates: Vec<(usize, usize)>,
}

impl<'a> ReturnFinder<'a> {
    fn new(pts: &'a [Complex64], opts: &'a LoopOptions) -> Self {
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for p in pts {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let extent = (hi - lo).norm();
        let cell = opts.closure_fraction * extent;
        let mut candidates = Vec::new();
        if !(cell > 0.0) {
            return ReturnFinder { pts, opts, candidates };
        }
        let key = |p: Complex64| (((p.re - lo.re) / cell).floor() as i64, ((p.im - lo.im) / cell).floor() as i64);
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (j, &p) in pts.iter().enumerate() {
            grid.entry(key(p)).or_default().push(j);
        }
        for (i, &p) in pts.iter().enumerate() {
            let (cx, cy) = key(p);
            let mut last = None;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(js) = grid.get(&(cx + dx, cy + dy)) {
                        for &j in js {
                            if j >= i + opts.n_min && (pts[j] - p).norm() <= cell {
                                last = Some(last.map_or(j, |l: usize| l.max(j)));
                            }
                        }
                    }
                }
            }
            if let Some(l) = last {
                candidates.push((i, l));
            }
        }
        ReturnFinder { pts, opts, candidates }
    }

    /// Best return index of each pass of the curve near `pts[i]`, for
    /// `j < hi`, with the gap-to-diameter ratio of each.
    fn returns(&self, i: usize, hi: usize, last: usize, first_only: bool) -> Vec<(usize, f64)> {
        let p = self.pts[i];
        let mut radius: f64 = 0.0;
        let mut out = Vec::new();
        let mut run: Option<(usize, f64, f64)> = None;
        let end = hi.min(last + 1);
        for j in i + 1..end {
            let gap = (self.pts[j] - p).norm();
            radius = radius.max(gap);
            let ok = j >= i + self.opts.n_min && gap <= self.opts.closure_fraction * radius;
            if ok {
                let ratio = gap / radius;
                run = Some(match run {
                    Some(r) if r.1 <= gap => r,
                    _ => (j, gap, ratio),
                });
            } else if let Some((bj, _, ratio)) = run.take() {
                out.push((bj, ratio));
                if first_only {
                    return out;
                }
            }
        }
        if let Some((bj, _, ratio)) = run {
            out.push((bj, ratio));
        }
        out
    }

    fn last_for(&self, i: usize) -> Option<usize> {
        self.candidates.binary_search_by_key(&i, |c| c.0).ok().map(|k| self.candidates[k].1)
    }

    fn segment(&self, lo: usize, hi: usize, out: &mut Vec<(usize, usize)>) {
        if hi <= lo + self.opts.n_min {
            return;
        }
        let start = self.candidates.partition_point(|c| c.0 < lo);
        let mut best: Option<(usize, usize, f64)> = None;
        for &(i, last) in &self.candidates[start..] {
            if i >= hi {
                break;
            }
            if last <= lo {
                continue;
            }
            let r = self.returns(i, hi, last, false);
            if r.is_empty() {
                continue;
            }
            let score: f64 = r.iter().map(|x| x.1).sum();
            let better = match best {
                None => true,
                Some((_, n, s)) => r.len() > n || (r.len() == n && score < s),
            };
            if better {
                best = Some((i, r.len(), score));
            }
        }
        let Some((anchor, _, _)) = best else { return };
        let mut i = anchor;
        while let Some(last) = self.last_for(i) {
            match self.returns(i, hi, last, true).first() {
                Some(&(j, _)) => {
                    out.push((i, j));
                    i = j;
                }
                None => break,
            }
        }
        self.segment(lo, anchor + 1, out);
        self.segment(i, hi, out);
    }
}
