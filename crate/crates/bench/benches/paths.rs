use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use repvar::connectivity::sample_rng;
use repvar::{
    canonical_path, classify_fix, randomized_representative, solve_commutator, ComponentLabel, GroupElement,
    PathConfig, Sign,
};

fn commutator(c: &mut Criterion) {
    let target = GroupElement::new(0.6, 0.48, -0.64, 0.0);
    c.bench_function("solve_commutator", |b| b.iter(|| solve_commutator(black_box(target))));
}

fn classify(c: &mut Criterion) {
    let mut rng = sample_rng(7, 0);
    let label = ComponentLabel::Off { sign: Sign::Plus, k: 0, l: 1 };
    let rep = randomized_representative(4, label, &mut rng).unwrap();
    c.bench_function("classify_fix/n=4", |b| b.iter(|| classify_fix(black_box(&rep), 4, 1e-9).unwrap()));
}

fn paths(c: &mut Criterion) {
    let cfg = PathConfig::default();
    let mut group = c.benchmark_group("canonical_path");
    group.sample_size(20);
    for n in [2i64, 3, 4] {
        let label = ComponentLabel::Off { sign: Sign::Plus, k: 0, l: 1 };
        let rep = randomized_representative(n, label, &mut sample_rng(11, n as u64)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &rep, |b, rep| {
            b.iter(|| canonical_path(rep, n, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, commutator, classify, paths);
criterion_main!(benches);
