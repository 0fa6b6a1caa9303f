use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qjets::ring::Ring;
use qjets_bench::random_matrices;

fn kernel_exponent(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_exponent");
    for (q, n) in [(2, 1), (2, 3), (3, 2), (5, 2)] {
        let ring = Ring::new(q, n).unwrap();
        let mats = random_matrices(&ring, 4, 8, 64, 7);
        group.bench_with_input(BenchmarkId::new("4x8", format!("q{q}n{n}")), &mats, |b, mats| {
            let mut buf = vec![0u32; 32];
            b.iter(|| {
                let mut total = 0;
                for m in mats {
                    buf.copy_from_slice(m);
                    total += ring.kernel_exponent(&mut buf, 4, 8);
                }
                total
            })
        });
    }
    group.finish();
}

criterion_group!(benches, kernel_exponent);
criterion_main!(benches);
