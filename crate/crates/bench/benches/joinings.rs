use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use ergocube::{furstenberg_joining, PointwiseJoinings, Rational};
use ergocube_bench::random;

fn furstenberg(c: &mut Criterion) {
    let mut g = c.benchmark_group("furstenberg");
    for m in [16, 32, 64] {
        let sys = random::<Rational>(3, m, 3);
        g.bench_with_input(BenchmarkId::new("joining_d3", m), &sys, |b, sys| {
            b.iter(|| furstenberg_joining(black_box(sys)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("pointwise_d3", m), &sys, |b, sys| {
            b.iter(|| PointwiseJoinings::new(black_box(sys)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, furstenberg);
criterion_main!(benches);
