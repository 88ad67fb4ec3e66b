use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use fibercert_core::brackets::{bracket, Lifted};
use fibercert_core::dynamics::flow;
use fibercert_core::fiberscan::solve_fiber_point;
use fibercert_core::{sampling, systems, FlowSpec, Mat3, ScalarField, ShiftFunction};

fn brackets(c: &mut Criterion) {
    let s = systems::kovalevskaya(1.0, 1.0).unwrap();
    let x = sampling::phase_points(s.space(), 1, 1.0, 3)[0];
    let (h, g) = (s.components()[0].clone(), s.components()[2].clone());
    c.bench_function("bracket/kovalevskaya", |b| b.iter(|| bracket(h.as_ref(), g.as_ref(), black_box(&x)).unwrap()));
}

fn flows(c: &mut Criterion) {
    for name in ["pendulum", "spherical_pendulum", "clebsch"] {
        let s = systems::from_name(name, &[]).unwrap();
        let x = sampling::phase_points(s.space(), 1, 1.0, 3)[0];
        let spec = FlowSpec::symmetric(0.1, 1e-3);
        c.bench_function(&format!("flow_100_steps/{name}"), |b| {
            b.iter(|| flow(s.hamiltonian().as_ref(), black_box(&x), &spec).unwrap())
        });
    }
}

fn shifts(c: &mut Criterion) {
    let sphere = ShiftFunction::harmonic((0..24).map(|i| 0.1 * i as f64 - 1.0).collect()).unwrap();
    let qs = sampling::low_discrepancy(sphere.space(), 64);
    c.bench_function("shift/harmonic_24", |b| {
        b.iter(|| qs.iter().map(|q| sphere.value(q) + sphere.differential(q).euclid_norm()).sum::<f64>())
    });
    let rot = systems::clebsch(1.0, 2.0, 3.0).unwrap();
    let trace = ShiftFunction::trace(*rot.space(), &Mat3::new(0.3, 0.1, 0.0, -0.2, 0.5, 0.4, 0.1, 0.0, -0.3)).unwrap();
    let qs = sampling::low_discrepancy(rot.space(), 64);
    c.bench_function("shift/trace", |b| b.iter(|| qs.iter().map(|q| trace.value(q)).sum::<f64>()));
    let lifted = Lifted::shift_generator(Arc::new(trace));
    let x = sampling::phase_points(rot.space(), 1, 1.0, 5)[0];
    c.bench_function("shift/lifted_gradient", |b| {
        b.iter(|| fibercert_core::PhaseField::gradient(&lifted, black_box(&x)))
    });
}

fn fibers(c: &mut Criterion) {
    let s = systems::spherical_pendulum();
    let seed = sampling::phase_points(s.space(), 1, 2.0, 7)[0];
    c.bench_function("fiber_solve/spherical_pendulum", |b| {
        b.iter(|| solve_fiber_point(&s, black_box(&[1.5, 0.2]), &seed))
    });
}

criterion_group!(kernels, brackets, flows, shifts, fibers);
criterion_main!(kernels);
