//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so every criterion is evaluated and reported even when an
//! earlier one fails.

use std::f64::consts::PI;
use std::fs;
use std::time::Instant;

use lpdos::argand::{
    detect_subloops, eq10_scan, loop_phase_integral, sweep_parameter, ArgandTrajectory, Eq10Options, SubLoop,
};
use lpdos::io::{Command, RunConfig};
use lpdos::lpdos::{lpdos, sum_rule_residual, ProbeSettings, EPS_MAG};
use lpdos::network::{
    random_network, three_prong_preset, Network, Position, RandomNetworkSpec, ThreeProngParams, ThreeProngU1,
    FIG3_ENERGY, FIG3_U1_RANGE, KSCAN_K_RANGE, KSCAN_U1,
};
use lpdos::run::{run, RunOptions};
use lpdos::scattering::{reciprocity_defect, solve_scattering, unitarity_defect};
use lpdos::verify::{magnitude_bound, negative_lpdos, probe_with_strength, sum_rule_points, verify, Status};
use lpdos::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn unitarity_and_reciprocity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let spec = RandomNetworkSpec::default();
    let (mut unit, mut recip, mut solved) = (0.0f64, 0.0f64, 0);
    for _ in 0..100 {
        let net = random_network(&mut rng, &spec);
        let vmax = net.edges.iter().map(|e| e.potential).fold(0.0, f64::max);
        let e = vmax + rng.gen_range(0.5..5.0);
        match solve_scattering(&net, e) {
            Ok(s) => {
                unit = unit.max(unitarity_defect(&s.smatrix));
                recip = recip.max(reciprocity_defect(&s.smatrix));
                solved += 1;
            }
            Err(err) => return outcome(false, format!("solve failed: {err}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        solved == 100 && unit < 1e-10 && recip < 1e-10 && secs < 5.0,
        format!("100 networks: unitarity {unit:.2e}, reciprocity {recip:.2e} (< 1e-10), {secs:.2} s (< 5 s)"),
    )
}

fn analytic_oracles() -> Outcome {
    let mut delta = 0.0f64;
    for k in [0.2, 0.5, 1.0, 1.7, 3.0, 6.0, 12.0] {
        for u in [-20.0, -4.0, -1.0, -0.1, 0.0, 0.3, 2.0, 8.0, 30.0] {
            let s = solve_scattering(&Network::delta_barrier(u), k * k).unwrap().smatrix;
            let want = Complex64::new(1.0, 0.0) / Complex64::new(1.0, u / (2.0 * k));
            delta = delta.max((s.elements[(1, 0)] - want).norm()).max((s.elements[(0, 1)] - want).norm());
        }
    }
    let mut star = 0.0f64;
    for e in [0.3, 2.0, 9.0] {
        let s = solve_scattering(&Network::star_junction(3, 0.0), e).unwrap().smatrix;
        for a in 0..3 {
            for g in 0..3 {
                let want = if a == g { -1.0 / 3.0 } else { 2.0 / 3.0 };
                star = star.max((s.elements[(a, g)] - want).norm());
            }
        }
    }
    let mut wire = 0.0f64;
    for (l, e) in [(0.5, 0.3), (1.0, 2.0), (4.0, 17.0)] {
        let s = solve_scattering(&Network::free_wire(l, 0.0), e).unwrap().smatrix;
        wire = wire.max((s.elements[(1, 0)].norm() - 1.0).abs()).max(s.elements[(0, 0)].norm());
    }
    outcome(
        delta < 1e-12 && star < 1e-12 && wire < 1e-12,
        format!("delta barrier {delta:.2e}, 3-lead junction {star:.2e}, free wire {wire:.2e} (< 1e-12)"),
    )
}

fn lpdos_normalization() -> Outcome {
    let mut worst = 0.0f64;
    let mut n = 0;
    for (l, k) in [(2.0, 0.5), (2.0, 1.0), (3.0, 2.2), (1.5, 4.0)] {
        let net = Network::free_wire(l, 0.0);
        for frac in [0.2, 0.5, 0.85] {
            let s = match lpdos(&net, k * k, "2", &Position::new("w", frac * l), "1", &ProbeSettings::default()) {
                Ok(s) => s,
                Err(e) => return outcome(false, format!("k = {k}: {e}")),
            };
            let want = 1.0 / (4.0 * PI * k);
            worst = worst.max((s.value - want).abs() / want);
            n += 1;
        }
    }
    outcome(worst < 1e-6, format!("{n} (k, r) points, max relative error {worst:.2e} (< 1e-6)"))
}

fn sum_rule() -> Outcome {
    let net = three_prong_preset(&ThreeProngParams::default()).unwrap();
    let (mut worst, mut worst_half, mut used, mut excluded) = (0.0f64, 0.0f64, 0, 0);
    for (e, pos) in sum_rule_points(60) {
        let coarse = sum_rule_residual(&net, e, &pos, "1", &probe_with_strength(&net, &pos, 1e-4, 1.0));
        let fine = sum_rule_residual(&net, e, &pos, "1", &probe_with_strength(&net, &pos, 1e-4, 2.0));
        match (coarse, fine) {
            (Ok(c), Ok(f)) => {
                worst = worst.max(c);
                worst_half = worst_half.max(f);
                used += 1;
            }
            (Err(err), _) | (_, Err(err)) if err.code() == "MAGNITUDE_TOO_SMALL" => excluded += 1,
            (Err(err), _) | (_, Err(err)) => return outcome(false, format!("E = {e}, {pos:?}: {err}")),
        }
    }
    outcome(
        used >= 50 && worst < 1e-4 && worst_half < worst,
        format!(
            "{used} points ({excluded} near zeros excluded), dU w = 1e-4: max residual {worst:.2e} (< 1e-4); \
             dU w halved: {worst_half:.2e} (must shrink)"
        ),
    )
}

fn fig3_structure() -> Outcome {
    let start = Instant::now();
    let b = ThreeProngU1(ThreeProngParams::default());
    let traj = match sweep_parameter(&b, "3", "1", FIG3_U1_RANGE, FIG3_ENERGY, &Default::default()) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let loops = detect_subloops(&traj);
    let secs = start.elapsed().as_secs_f64();
    let mut ok = loops.len() >= 3 && secs < 30.0;
    let mut parts = Vec::new();
    for l in &loops {
        let phase = loop_phase_integral(l, &traj).map_or(f64::INFINITY, f64::abs);
        let bound = magnitude_bound(l, &traj);
        let good = l.closure_gap <= 1e-2 * l.diameter
            && l.winding == Some(0)
            && phase < 1e-3
            && l.magnitude_integral.abs() <= bound;
        ok &= good;
        parts.push(format!(
            "[gap/diam {:.1e}, winding {:?}, |sum dtheta| {:.1e}, |sum d|s|^2| {:.1e} <= {:.1e}]",
            l.closure_gap / l.diameter,
            l.winding.unwrap_or(i64::MIN),
            phase,
            l.magnitude_integral.abs(),
            bound
        ));
    }
    outcome(ok, format!("{} loops in {secs:.2} s (< 30 s): {}", loops.len(), parts.join(" ")))
}

fn winding_dichotomy() -> Outcome {
    let n = 1000;
    let t: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let v: Vec<Complex64> = t
        .iter()
        .map(|&x| Complex64::new(0.3, 0.1) + Complex64::new(0.9 * (2.0 * PI * x).cos(), 0.6 * (2.0 * PI * x).sin()))
        .collect();
    let traj = ArgandTrajectory::from_samples(&t, &v, EPS_MAG);
    let l = SubLoop::new(&traj, 0, n, EPS_MAG);
    match loop_phase_integral(&l, &traj) {
        Ok(p) => outcome((p - 2.0 * PI).abs() < 1e-3, format!("phase integral {p:.9} vs 2pi (within 1e-3)")),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn eq10_default_scan() -> lpdos::argand::Eq10Scan {
    let cfg = RunConfig::preset();
    let b = ThreeProngU1(ThreeProngParams::default());
    eq10_scan(&b, KSCAN_K_RANGE, KSCAN_U1, cfg.eq10_scan.delta_u1, "3", "1", &Eq10Options::default()).unwrap()
}

fn fig4_structure(scan: &lpdos::argand::Eq10Scan) -> Outcome {
    let s = &scan.summary;
    let a = s.sign_changes_lhs >= 6 && s.sign_changes_rhs >= 6;
    let b = s.pearson_upper > 0.9;
    outcome(
        a && b,
        format!(
            "(a) sign changes lhs {} rhs {} (>= 6) {}; (b) upper-half Pearson {:.3} (> 0.9) {}; \
             (c) relative discrepancy lower {:.3} vs upper {:.3} (reported)",
            s.sign_changes_lhs,
            s.sign_changes_rhs,
            if a { "ok" } else { "FAILED" },
            s.pearson_upper,
            if b { "ok" } else { "FAILED" },
            s.relative_discrepancy_lower,
            s.relative_discrepancy_upper
        ),
    )
}

fn negative_lpdos_certified(scan: &lpdos::argand::Eq10Scan) -> Outcome {
    let checks = verify(&RunConfig::preset());
    let certified = checks.iter().find(|c| c.name == "negative_lpdos_certified");
    let sample = negative_lpdos(&ThreeProngParams::default(), scan.summary.k_at_min_mag2, "1", KSCAN_U1);
    match (certified, sample) {
        (Some(c), Some(s)) => outcome(
            c.status == Status::Pass && s.value < 0.0 && s.richardson_error < s.value.abs() / 10.0,
            format!(
                "rho = {:.4e} at E = {:.6} (alpha {}, {} x = {}), richardson error {:.2e} (< |rho|/10)",
                s.value, s.energy, s.out_channel, s.position.edge, s.position.x, s.richardson_error
            ),
        ),
        _ => outcome(false, "verify did not certify a negative sample"),
    }
}

fn fano_zero(scan: &lpdos::argand::Eq10Scan) -> Outcome {
    let s = &scan.summary;
    outcome(
        s.min_mag2 < 1e-8,
        format!("min |t31|^2 = {:.3e} at k = {:.9} (< 1e-8)", s.min_mag2, s.k_at_min_mag2),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::preset();
    cfg.eq10_scan.options.base_points = 401;
    cfg.verify.random_networks = 20;
    cfg.workers = Some(2);
    let mut differing = Vec::new();
    for command in Command::ALL {
        let bytes: Vec<Vec<u8>> = ["a", "b"]
            .iter()
            .map(|r| {
                let opts = RunOptions { command: Some(command), out_dir: dir.path().join(r), ..Default::default() };
                let report = run(&cfg, &opts).unwrap();
                fs::read(report.output).unwrap()
            })
            .collect();
        if bytes[0] != bytes[1] {
            differing.push(command.name());
        }
    }
    outcome(
        differing.is_empty(),
        format!("6 commands run twice with 2 workers; differing: {}", if differing.is_empty() { "none".into() } else { differing.join(", ") }),
    )
}

fn main() {
    let scan = eq10_default_scan();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "unitarity and reciprocity", unitarity_and_reciprocity()),
        (2, "analytic oracles", analytic_oracles()),
        (3, "LPDOS normalization", lpdos_normalization()),
        (4, "sum rule", sum_rule()),
        (5, "Argand sub-loops", fig3_structure()),
        (6, "winding dichotomy", winding_dichotomy()),
        (7, "finite-difference comparison", fig4_structure(&scan)),
        (8, "certified negative LPDOS", negative_lpdos_certified(&scan)),
        (9, "Fano zero", fano_zero(&scan)),
        (10, "determinism", determinism()),
    ];
    let mut failed = 0;
    for (n, name, o) in &results {
        println!("criterion {n:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
