//! Timings of the main numerical kernels on the preset systems.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::Vector2;

use phs_core::analytic::family::family_omega;
use phs_core::analytic::resolvent::resolve;
use phs_core::analytic::spectrum::{spectrum_scan, Region};
use phs_core::boundary::{classify_conditions, transmission_line_wb};
use phs_core::discretize::{assemble_generator, build_grid};
use phs_core::interface_ops::PiecewiseField;
use phs_core::path::MovingPath;
use phs_core::presets::{moving_family, resistive_ends, shorted_line};
use phs_core::simulate::CayleyStepper;

fn classification(c: &mut Criterion) {
    let wb = transmission_line_wb(1.0);
    c.bench_function("classify_conditions", |b| b.iter(|| classify_conditions(black_box(&wb), 1.0).unwrap()));
}

fn assembly(c: &mut Criterion) {
    let sys = resistive_ends(5.0).unwrap();
    let mut group = c.benchmark_group("assemble_generator");
    for n in [32, 64, 128] {
        let grid = build_grid(-1.0, 0.0, 1.0, n, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, grid| {
            b.iter(|| assemble_generator(grid, &sys.profile, &sys.bc, &sys.interface).unwrap())
        });
    }
    group.finish();
}

fn cayley_step(c: &mut Criterion) {
    let sys = shorted_line(0.3).unwrap();
    let mut group = c.benchmark_group("cayley_step");
    for n in [64, 128] {
        let grid = build_grid(-1.0, 0.3, 1.0, n, n).unwrap();
        let gen = assemble_generator(&grid, &sys.profile, &sys.bc, &sys.interface).unwrap();
        let x = gen.project(|_, z| Vector2::new((-(z / 0.2).powi(2)).exp(), 0.0));
        let stepper = CayleyStepper::new(&gen, 1e-3).unwrap();
        group.bench_function(BenchmarkId::from_parameter(n), |b| b.iter(|| stepper.step(black_box(&x)).unwrap()));
    }
    group.finish();
}

fn resolvent(c: &mut Criterion) {
    let sys = resistive_ends(5.0).unwrap();
    let y = PiecewiseField::from_poly_coeffs(
        -1.0,
        0.0,
        1.0,
        &[vec![0.3, -1.2, 0.5], vec![1.1, 0.4, -0.7]],
        &[vec![-0.8, 0.2, 1.5], vec![0.6, -1.0, 0.3]],
    )
    .unwrap();
    c.bench_function("resolve lambda=1", |b| {
        b.iter(|| resolve(black_box(1.0), &y, &sys.profile, &sys.bc, &sys.interface).unwrap())
    });
}

fn spectrum(c: &mut Criterion) {
    let sys = resistive_ends(5.0).unwrap();
    let region = Region::new(-2.0, 1.0, -10.0, 10.0).unwrap();
    let mut group = c.benchmark_group("spectrum");
    group.sample_size(10);
    group.bench_function("scan 16x64 seeds", |b| {
        b.iter(|| spectrum_scan(&sys.profile, &sys.bc, &sys.interface, &region, &[]).unwrap())
    });
    group.finish();
}

fn family(c: &mut Criterion) {
    let fam = moving_family(0.8, 2.0, MovingPath::Sinusoidal { l0: 0.0, amp: 0.4, freq: 1.0 }, 1.0).unwrap();
    c.bench_function("family_omega", |b| b.iter(|| family_omega(black_box(&fam)).unwrap()));
}

criterion_group!(benches, classification, assembly, cayley_step, resolvent, spectrum, family);
criterion_main!(benches);
