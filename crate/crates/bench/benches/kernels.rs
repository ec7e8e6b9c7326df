use criterion::{criterion_group, criterion_main, Criterion};
use pbcast::*;
use std::hint::black_box;

fn params() -> PbcParams {
    PbcParams::new(0.34, 0.1, 1.0).unwrap()
}

fn rates(c: &mut Criterion) {
    let p = params();
    let d = InputDist::new(0.4).unwrap();
    c.bench_function("mutual_info_rate", |b| b.iter(|| mutual_info_rate(Receiver::One, black_box(d), &p)));
    c.bench_function("breakpoints", |b| b.iter(|| breakpoints(black_box(0.1), black_box(1.0))));
}

fn envelopes(c: &mut Criterion) {
    let p = params();
    let samples: Vec<(f64, f64)> = (0..4097)
        .map(|i| {
            let q = i as f64 / 4096.0;
            let d = InputDist::new(q).unwrap();
            (q, mutual_info_rate(Receiver::One, d, &p) - mutual_info_rate(Receiver::Two, d, &p))
        })
        .collect();
    c.bench_function("hull_envelope_4097", |b| b.iter(|| hull_envelope(black_box(&samples))));
    c.bench_function("analytic_envelope", |b| b.iter(|| analytic_envelope(Orientation::OneMinusTwo, black_box(&p))));
    c.bench_function("constrained_weighted_sum_rate", |b| {
        let q = PbcParams::new(0.45, 0.1, 1.0).unwrap();
        b.iter(|| constrained_weighted_sum_rate(black_box(0.7), &q, Receiver::One))
    });
}

fn bounds(c: &mut Criterion) {
    let p = params();
    let mut g = c.benchmark_group("bounds");
    g.sample_size(10);
    g.bench_function("marton_dual_4097", |b| b.iter(|| marton_dual(&p, 4097)));
    g.bench_function("marton_sum_rate", |b| b.iter(|| marton_sum_rate(&p, &MartonOptions::default())));
    g.bench_function("uv_sum_rate", |b| b.iter(|| uv_sum_rate(&p, &UvOptions::default())));
    g.finish();
}

fn skewed(c: &mut Criterion) {
    let ch = skewed_channel(SkewedParams::new(0.3, 0.6).unwrap());
    c.bench_function("classify_dmbc_cell", |b| b.iter(|| classify_dmbc(black_box(&ch), &DmbcOptions::default())));
}

criterion_group!(benches, rates, envelopes, bounds, skewed);
criterion_main!(benches);
