use criterion::{criterion_group, criterion_main, Criterion};
use natforms_core::chern_weil::{chern_form, random_connection};
use natforms_core::classifier::{decompose, random_homogeneous, DecomposeOptions, PolynomialOp};
use natforms_core::sampler::{random_form, random_map, trial_rng, MapKind};
use natforms_core::{InvariantPoly, MatLieAlg, Signature};
use std::hint::black_box;

fn wedge(c: &mut Criterion) {
    let mut rng = trial_rng(1, 0);
    let a = random_form(&mut rng, 6, 2);
    let b = random_form(&mut rng, 6, 3);
    c.bench_function("wedge 2-form ^ 3-form on R^6", |bench| {
        bench.iter(|| black_box(&a).wedge(black_box(&b)))
    });
    c.bench_function("d of a 3-form on R^6", |bench| {
        bench.iter(|| black_box(&b).ext_d())
    });
}

fn pullback(c: &mut Criterion) {
    let mut rng = trial_rng(2, 0);
    let w = random_form(&mut rng, 4, 2);
    let tau = random_map(&mut rng, MapKind::Quadratic, 4, 4);
    c.bench_function("pullback of a 2-form along a quadratic map", |bench| {
        bench.iter(|| black_box(&w).pullback(black_box(&tau)))
    });
}

fn classify(c: &mut Criterion) {
    let sig = Signature::new(vec![1, 2], 5).unwrap();
    let op =
        PolynomialOp::new(sig.clone(), random_homogeneous(&mut trial_rng(3, 0), &sig)).unwrap();
    c.bench_function("decompose p=[1,2], q=5", |bench| {
        bench.iter(|| decompose(&op, &DecomposeOptions::default()))
    });
}

fn chern(c: &mut Criterion) {
    let gl2 = MatLieAlg::gl(2);
    let theta = random_connection(&mut trial_rng(4, 0), &gl2, 5)
        .curvature()
        .unwrap();
    let t = InvariantPoly::sym_trace(&gl2, 2);
    c.bench_function("symmetrised trace of Θ^2 over gl2 on R^5", |bench| {
        bench.iter(|| chern_form(black_box(&t), black_box(&theta), &gl2))
    });
}

criterion_group!(benches, wedge, pullback, classify, chern);
criterion_main!(benches);
