use criterion::{criterion_group, criterion_main, Criterion};
use qjets::bounds::check_totneg_lemma;
use qjets::strata::{enumerate_semisimple_types, enumerate_top_types, tau_min, OraclePolicy, DEFAULT_TOP_TYPE_CAP, DEFAULT_TYPE_CAP};
use qjets::{DimVector, Quiver};

fn strata(c: &mut Criterion) {
    let q = Quiver::from_counts(&[2, 2, 2], &[((0, 1), 1), ((0, 2), 1), ((1, 2), 1)]).unwrap();
    let d = DimVector::new(vec![3, 3, 3]);
    let tau = tau_min(&q, &d).unwrap();
    c.bench_function("top_types_333", |b| b.iter(|| enumerate_top_types(&tau, DEFAULT_TOP_TYPE_CAP).unwrap().len()));
    c.bench_function("totneg_lemma_333", |b| b.iter(|| check_totneg_lemma(&q, &d).unwrap().0.verdict));
    let s2 = Quiver::g_loop(2);
    let d6 = DimVector::new(vec![6]);
    c.bench_function("types_s2_d6", |b| {
        b.iter(|| enumerate_semisimple_types(&s2, &d6, OraclePolicy::Strict, DEFAULT_TYPE_CAP).unwrap().len())
    });
}

criterion_group!(benches, strata);
criterion_main!(benches);
