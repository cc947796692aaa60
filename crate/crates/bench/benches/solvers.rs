use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use neontrap_bench::{constants, radial_grid, reference_pillar, superconductor};
use neontrap_core::bound_states::PerpendicularGridSpec;
use neontrap_core::{
    image_series_oracle, lateral_spectrum, perpendicular_potential, EnergyCurve, FieldSpec, PerpendicularSolver,
};

fn image_potential(c: &mut Criterion) {
    let consts = constants();
    let stack = superconductor(10.0);
    let mut group = c.benchmark_group("image_potential");
    group.bench_function("quadrature", |b| {
        b.iter(|| perpendicular_potential(&stack, &consts, black_box(1.0)).unwrap())
    });
    group.bench_function("series_2000", |b| {
        b.iter(|| image_series_oracle(&stack, &consts, black_box(1.0), 2000).unwrap())
    });
    group.finish();
}

fn ground_state(c: &mut Criterion) {
    let stack = superconductor(10.0);
    let mut group = c.benchmark_group("ground_state");
    for n in [4096usize, 8192, 16384] {
        let solver = PerpendicularSolver::new(
            constants(),
            PerpendicularGridSpec {
                n_points: n,
                ..PerpendicularGridSpec::default()
            },
        );
        solver.ground_state(&stack, &FieldSpec::zero()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &solver, |b, s| {
            b.iter(|| s.ground_state(&stack, &FieldSpec::zero()).unwrap())
        });
    }
    group.finish();
}

fn lateral(c: &mut Criterion) {
    let solver = PerpendicularSolver::shared();
    let template = superconductor(10.0);
    let profile = reference_pillar();
    let curve = EnergyCurve::build(solver, &template, FieldSpec::zero(), (9.5, 10.0), 60).unwrap();
    let grid = radial_grid(16384);
    let consts = constants();
    let mut group = c.benchmark_group("lateral");
    group.sample_size(10);
    group.bench_function("energy_curve_60_knots", |b| {
        b.iter(|| EnergyCurve::build(solver, &template, FieldSpec::zero(), (9.5, 10.0), 60).unwrap())
    });
    group.bench_function("radial_spectrum_16384", |b| {
        b.iter(|| lateral_spectrum(&curve, &profile, &consts, 2, &grid).unwrap())
    });
    group.finish();
}

criterion_group!(benches, image_potential, ground_state, lateral);
criterion_main!(benches);
