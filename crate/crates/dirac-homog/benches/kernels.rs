//! Criterion benches for the data-parallel kernels, comparing the rayon path
//! against the sequential fallback on the same workload. Building the crate
//! with `--no-default-features` turns every parallel map into the sequential
//! one; these benches expose both paths in a single build via the `_seq`
//! twins where they exist.

use criterion::{criterion_group, criterion_main, Criterion};
use dirac_homog::bulk::{chern_raw, chern_raw_seq, BulkModel, ChernResolution};
use dirac_homog::cell::{solve_cells, PotentialSet};
use dirac_homog::edge::{edge_bands, EdgeScanConfig};
use dirac_homog::homog::resolvent_solve;
use dirac_homog::krylov::GmresConfig;
use dirac_homog::oper2d::{BoxGrid, DiscreteOperator2D, SpinorField};
use dirac_homog::strip::{InterfaceModel, StripOperator};
use dirac_homog::torus::PeriodicGrid;
use dirac_homog::wall::{DomainWallProfile, WallShape};
use num_complex::Complex64;
use std::hint::black_box;

fn bench_chern_quadrature(c: &mut Criterion) {
    let model = BulkModel::unperturbed(1.0, 1.0).unwrap();
    let res = ChernResolution {
        n_radial: 1000,
        n_angular: 128,
    };
    let mut group = c.benchmark_group("chern_quadrature");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| chern_raw(black_box(&model), black_box(res)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| chern_raw_seq(black_box(&model), black_box(res)))
    });
    group.finish();
}

fn bench_cell_solve(c: &mut Criterion) {
    let grid = PeriodicGrid::new(128).unwrap();
    let p = PotentialSet::electric(grid, 4.0);
    let mut group = c.benchmark_group("cell_solve");
    group.sample_size(20);
    group.bench_function("n128", |b| {
        b.iter(|| solve_cells(black_box(&p), 1.0).unwrap())
    });
    group.finish();
}

fn bench_strip_eig(c: &mut Criterion) {
    let model = InterfaceModel::new(-0.5, 1.0, [0.0, 0.0, 0.0, 1.0]);
    let wall = DomainWallProfile::new(-1.0, 1.0, WallShape::SmoothstepQuintic).unwrap();
    let mut group = c.benchmark_group("strip_eigenpairs");
    group.sample_size(10);
    group.bench_function("n512_window", |b| {
        b.iter(|| {
            let op = StripOperator::build(0.3, &model, Some(&wall), 0.0, 12.0, 512).unwrap();
            op.eigpairs_in(-0.6, 0.6).unwrap()
        })
    });
    group.finish();
}

fn bench_xi_sweep(c: &mut Criterion) {
    // The ξ₁ sweep is the crate's main parallel map; with the `parallel`
    // feature it fans out over rayon, without it this same call runs
    // sequentially (build both ways to compare across builds).
    let model = InterfaceModel::new(-0.5, 1.0, [0.0, 0.0, 0.0, 1.0]);
    let wall = DomainWallProfile::new(-1.0, 1.0, WallShape::SmoothstepQuintic).unwrap();
    let cfg = EdgeScanConfig::derive(8.0, 192, &wall, 0.5, 2.0, 15);
    let mut group = c.benchmark_group("xi1_sweep");
    group.sample_size(10);
    group.bench_function("steps15_n192", |b| {
        b.iter(|| edge_bands(black_box(&model), black_box(&wall), black_box(&cfg)).unwrap())
    });
    group.finish();
}

fn bench_resolvent(c: &mut Criterion) {
    let grid = BoxGrid::new(1.0, 64).unwrap();
    let cell = PeriodicGrid::new(32).unwrap();
    let p = PotentialSet::electric(cell, 4.0);
    let op = DiscreteOperator2D::oscillatory(grid, 0.125, &p, None, -0.05, 1.0).unwrap();
    let f = SpinorField::gaussian_bump(grid, (0.5, 0.5), 0.1);
    let z = Complex64::new(0.0, 1.0);
    let mut group = c.benchmark_group("resolvent_gmres");
    group.sample_size(20);
    group.bench_function("n64_eps8", |b| {
        b.iter(|| {
            resolvent_solve(black_box(&op), z, black_box(&f), GmresConfig::default()).unwrap()
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_chern_quadrature,
    bench_cell_solve,
    bench_strip_eig,
    bench_xi_sweep,
    bench_resolvent
);
criterion_main!(benches);
