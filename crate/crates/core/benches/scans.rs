//! Sequential (one worker) against data-parallel execution of the main scans.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpdos::argand::{eq10_scan, sweep_parameter, Eq10Options, SweepOptions};
use lpdos::exec::with_workers;
use lpdos::lpdos::{lpdos_all_channels, ProbeSettings};
use lpdos::network::{
    three_prong_preset, Position, ThreeProngParams, ThreeProngU1, FIG3_ENERGY, FIG3_U1_RANGE, KSCAN_K_RANGE, KSCAN_U1,
};

const MODES: [(&str, Option<usize>); 2] = [("sequential", Some(1)), ("parallel", None)];

fn argand(c: &mut Criterion) {
    let b = ThreeProngU1(ThreeProngParams::default());
    let opts = SweepOptions { delta_step: 0.005, ..Default::default() };
    let mut g = c.benchmark_group("argand_sweep");
    g.sample_size(10);
    for (name, workers) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| with_workers(workers, || sweep_parameter(&b, "3", "1", FIG3_U1_RANGE, FIG3_ENERGY, &opts).unwrap()))
        });
    }
    g.finish();
}

fn eq10(c: &mut Criterion) {
    let b = ThreeProngU1(ThreeProngParams::default());
    let opts = Eq10Options::default();
    let mut g = c.benchmark_group("eq10_scan");
    g.sample_size(10);
    for (name, workers) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| with_workers(workers, || eq10_scan(&b, KSCAN_K_RANGE, KSCAN_U1, 1e-2, "3", "1", &opts).unwrap()))
        });
    }
    g.finish();
}

fn lpdos_map(c: &mut Criterion) {
    let net = three_prong_preset(&ThreeProngParams::default()).unwrap();
    let points: Vec<(f64, Position)> = (0..16)
        .flat_map(|i| {
            let e = 0.7 + 0.5 * i as f64;
            net.edges.iter().map(move |edge| (e, Position::new(edge.id.clone(), 0.5 * edge.length)))
        })
        .collect();
    let settings = ProbeSettings::default();
    let mut g = c.benchmark_group("lpdos_map");
    g.sample_size(10);
    for (name, workers) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| {
                with_workers(workers, || {
                    lpdos::exec::par_map(&points, |(e, pos)| lpdos_all_channels(&net, *e, pos, "1", &settings).unwrap())
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, argand, eq10, lpdos_map);
criterion_main!(benches);
