use std::f64::consts::FRAC_PI_4;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nonlocal_core::geometry::{emit_regions, hu_curve, Region, RegionRequest, Sampling, Setup};
use nonlocal_core::lhv::{lhv_feasibility, sample_raffle};
use nonlocal_core::{
    born_array, family_settings, find_broken_arrows, hardy_state, hu_state, Raffle, Scenario,
};

fn bench_arrays(c: &mut Criterion) {
    let s = family_settings(FRAC_PI_4);
    let state = hu_state(FRAC_PI_4, (&s[1], &s[1])).unwrap();
    c.bench_function("born_array hu 2x2", |b| {
        b.iter(|| born_array(black_box(&state), &s, &s).unwrap())
    });
}

fn bench_chains(c: &mut Criterion) {
    let s = family_settings(FRAC_PI_4);
    let state = hu_state(FRAC_PI_4, (&s[1], &s[1])).unwrap();
    let array = born_array(&state, &s, &s).unwrap();
    c.bench_function("find_broken_arrows hu", |b| {
        b.iter(|| find_broken_arrows(black_box(&array), 1e-10))
    });
}

fn bench_lhv(c: &mut Criterion) {
    let alpha = (0.4f64).sqrt().acos();
    let s = family_settings(alpha);
    let state = hardy_state(alpha, (&s[0], &s[0])).unwrap();
    let array = born_array(&state, &s, &s).unwrap();
    c.bench_function("lhv_feasibility hardy", |b| {
        b.iter(|| lhv_feasibility(black_box(&array), 1e-9).unwrap())
    });

    let raffle = Raffle::uniform(Scenario::distinct(&["a", "b"], &["a", "b"]).unwrap()).unwrap();
    c.bench_function("sample_raffle 1e5 draws", |b| {
        b.iter(|| sample_raffle(black_box(&raffle), 100_000, 7).unwrap())
    });
}

fn bench_geometry(c: &mut Criterion) {
    let alphas: Vec<f64> = (0..1001)
        .map(|i| i as f64 * std::f64::consts::FRAC_PI_2 / 1000.0)
        .collect();
    c.bench_function("hu_curve 1001 points", |b| {
        b.iter(|| hu_curve(black_box(&alphas)).unwrap())
    });

    let request = RegionRequest {
        setup: Setup::Mermin,
        region: Region::Q,
        sampling: Sampling::Grid,
        resolution: 21,
        tol: 1e-9,
    };
    c.bench_function("emit_regions mermin grid 21^3", |b| {
        b.iter(|| emit_regions(black_box(&request)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_arrays,
    bench_chains,
    bench_lhv,
    bench_geometry
);
criterion_main!(benches);
