use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hartmann_ts::airy::airy_bundle;
use hartmann_ts::dispersion::gamma0;
use hartmann_ts::numerics::{mild_solve, GradedGrid};
use hartmann_ts::osresolvent::{assemble, DiscreteBVP, OsKind};
use hartmann_ts::{Complex64 as C, HartmannProfile, SpectralParams};

fn airy(c: &mut Criterion) {
    let mut g = c.benchmark_group("airy_bundle");
    for (name, z) in [("series", C::new(0.5, 1.0)), ("quadrature", C::new(-6.0, 20.0)), ("asymptotic", C::new(70.0, -40.0))] {
        g.bench_function(name, |b| b.iter(|| airy_bundle(black_box(z)).unwrap()));
    }
    g.finish();
}

fn dispersion(c: &mut Criterion) {
    let p = SpectralParams::eighth(1e-12, 2.0).unwrap();
    let c0 = p.disk_center();
    c.bench_function("gamma0", |b| b.iter(|| gamma0(black_box(c0), &p).unwrap()));
}

fn kernel(c: &mut Criterion) {
    let grid = GradedGrid::new(160.0, 4000, 1e-3).unwrap();
    let s: Vec<C> = grid.nodes().iter().map(|&y| C::from((-y).exp())).collect();
    let lambda = C::new(0.3, 0.2);
    c.bench_function("mild_solve_4000", |b| b.iter(|| mild_solve(&grid, black_box(lambda), &s).unwrap()));
}

fn orr_sommerfeld(c: &mut Criterion) {
    let p = SpectralParams::eighth(1e-10, 2.0).unwrap();
    let prof = HartmannProfile::default();
    let bvp = DiscreteBVP::for_params(&p, 4000).unwrap();
    let mut g = c.benchmark_group("os_full_4000");
    g.sample_size(20);
    g.bench_function("assemble", |b| b.iter(|| assemble(OsKind::Full, &p, &prof, &bvp)));
    g.bench_function("assemble_factor", |b| b.iter(|| assemble(OsKind::Full, &p, &prof, &bvp).factor().unwrap()));
    g.finish();
}

criterion_group!(benches, airy, dispersion, kernel, orr_sommerfeld);
criterion_main!(benches);
