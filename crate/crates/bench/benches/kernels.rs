use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gpz_core::dynamics::Stepper;
use gpz_core::{
    energy, generate, laplacian, make_grid, norms, u_dot, ComplexField, Method, ScenarioSpec,
};

fn random_field(dim: usize, n: usize, length: f64) -> ComplexField {
    let grid = make_grid(dim, n, length).unwrap();
    let spec = ScenarioSpec::RandomZhidkov {
        seed: 1,
        amplitude: 0.3,
        mode_cutoff: 8,
    };
    generate(&spec, &grid).unwrap()
}

fn steppers(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for (dim, n, length) in [(1, 4096, 100.0), (2, 128, 32.0), (2, 256, 32.0)] {
        let u = random_field(dim, n, length);
        for (name, method, dt) in [
            ("strang", Method::StrangSplit, 1e-3),
            ("rk4", Method::Rk4Oracle, 1e-4),
        ] {
            let mut stepper = Stepper::new(u.grid(), dt, method, true);
            let mut values = u.values().to_vec();
            group.bench_with_input(
                BenchmarkId::new(name, format!("{dim}d_{n}")),
                &(),
                |b, _| b.iter(|| stepper.step(&mut values)),
            );
        }
    }
    group.finish();
}

fn diagnostics(c: &mut Criterion) {
    let mut group = c.benchmark_group("diagnostics");
    for (dim, n, length) in [(1, 4096, 100.0), (2, 256, 32.0)] {
        let u = random_field(dim, n, length);
        let id = format!("{dim}d_{n}");
        group.bench_with_input(BenchmarkId::new("laplacian", &id), &u, |b, u| {
            b.iter(|| laplacian(u).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("u_dot", &id), &u, |b, u| {
            b.iter(|| u_dot(u).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("energy", &id), &u, |b, u| {
            b.iter(|| energy(u).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("norms", &id), &u, |b, u| {
            b.iter(|| norms(u, 3).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, steppers, diagnostics);
criterion_main!(benches);
