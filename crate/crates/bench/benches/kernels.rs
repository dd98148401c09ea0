use criterion::{black_box, criterion_group, criterion_main, Criterion};
use lsmap_core::bernstein::kappa_qp;
use lsmap_core::map_exponent::f_matrix;
use lsmap_core::montecarlo::{rng_stream, StableSampler};
use lsmap_core::special::log_gamma;
use lsmap_core::{FactorIndices, IndexKind, QuadConfig, StableParams, C64};

fn special(c: &mut Criterion) {
    let z = C64::new(0.37, 12.5);
    c.bench_function("log_gamma", |b| b.iter(|| log_gamma(black_box(z)).unwrap()));
}

fn exponent(c: &mut Criterion) {
    let p = StableParams::new(1.4, 0.45).unwrap();
    let z = C64::new(0.2, 3.0);
    c.bench_function("f_matrix", |b| b.iter(|| f_matrix(&p, black_box(z)).unwrap()));
}

fn bernstein(c: &mut Criterion) {
    let cfg = QuadConfig::default();
    let mut g = c.benchmark_group("kappa_qp");
    for (a, r) in [(0.7, 0.4), (1.6, 0.45)] {
        let p = StableParams::new(a, r).unwrap();
        let idx = FactorIndices::of(&p, IndexKind::ArArhPlusOne);
        g.bench_function(format!("alpha={a}"), |b| {
            b.iter(|| kappa_qp(&p, &idx, black_box(C64::new(2.5, 1.0)), &cfg).unwrap())
        });
    }
    g.finish();
}

fn sampler(c: &mut Criterion) {
    let p = StableParams::new(1.4, 0.4).unwrap();
    let s = StableSampler::new(&p);
    let mut rng = rng_stream(7, 0);
    c.bench_function("stable_sample_x1000", |b| {
        b.iter(|| (0..1000).map(|_| s.sample(&mut rng)).sum::<f64>())
    });
}

criterion_group!(benches, special, exponent, bernstein, sampler);
criterion_main!(benches);
