use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gsbm_core::bounds::{bound_exact, bound_mc};
use gsbm_core::channel::{build_hsbm, build_sbm, build_truth_or_haar, symmetric_interaction_matrix, symmetric_interaction_tensor};
use gsbm_core::{characteristic_tensor, injective_norm, sample, FiniteGroup, GroupMode, InjectiveOptions, TinyInstance};

fn kernels(c: &mut Criterion) {
    let sbm = build_sbm(&symmetric_interaction_matrix(2, 3.0, 1.0), 100).unwrap();
    let hsbm = build_hsbm(&symmetric_interaction_tensor(3, 3, 4.0, 1.0), 50).unwrap();
    let sync = build_truth_or_haar(&FiniteGroup::cyclic(3).unwrap(), 0.05, GroupMode::Sync).unwrap();

    c.bench_function("characteristic_tensor hsbm p=3 k=3", |b| {
        b.iter(|| characteristic_tensor(black_box(&hsbm)))
    });
    let t3 = characteristic_tensor(&hsbm);
    c.bench_function("injective_norm p=3 k=3", |b| {
        b.iter(|| injective_norm(black_box(&t3), &InjectiveOptions::default()))
    });
    c.bench_function("bound_exact sbm n=20 D=6", |b| b.iter(|| bound_exact(black_box(&sbm), 20, 6)));
    c.bench_function("bound_mc sync z3 n=400 D=10 10k", |b| {
        b.iter(|| bound_mc(black_box(&sync), 400, 10, 10_000, 1))
    });
    let tiny = TinyInstance::new(sbm.clone(), 5).unwrap();
    c.bench_function("oracle cadv sbm n=5 D=3", |b| b.iter(|| tiny.cadv_exact(black_box(3))));
    c.bench_function("sample planted sbm n=200", |b| b.iter(|| sample(black_box(&sbm), 200, true, 9)));
}

criterion_group!(benches, kernels);
criterion_main!(benches);
