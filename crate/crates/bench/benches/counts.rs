use criterion::{criterion_group, criterion_main, Criterion};
use qjets::count::{count_fiber_over_origin, count_moment_fiber, CountOptions, Method};
use qjets::{DimVector, Quiver};

fn counts(c: &mut Criterion) {
    let opts = CountOptions::with_threads(1);
    let mut group = c.benchmark_group("counts");
    group.sample_size(10);
    let a2 = (Quiver::a2(), DimVector::new(vec![1, 1]));
    group.bench_function("a2_q3_n3_kernel", |b| {
        b.iter(|| count_moment_fiber(&a2.0, &a2.1, 3, 3, Method::Kernel, opts).unwrap())
    });
    group.bench_function("a2_q3_n2_brute", |b| {
        b.iter(|| count_moment_fiber(&a2.0, &a2.1, 3, 2, Method::Brute, opts).unwrap())
    });
    let tri = (Quiver::cycle(3), DimVector::new(vec![1, 1, 1]));
    group.bench_function("triangle_q2_n2_kernel", |b| {
        b.iter(|| count_moment_fiber(&tri.0, &tri.1, 2, 2, Method::Kernel, opts).unwrap())
    });
    let s2 = (Quiver::g_loop(2), DimVector::new(vec![2]));
    group.bench_function("s2_d2_q2_n2_kernel", |b| {
        b.iter(|| count_moment_fiber(&s2.0, &s2.1, 2, 2, Method::Kernel, opts).unwrap())
    });
    group.bench_function("s2_d2_q2_origin_m2", |b| {
        b.iter(|| count_fiber_over_origin(&s2.0, &s2.1, 2, 2, opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, counts);
criterion_main!(benches);
