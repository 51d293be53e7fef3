use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use frnn_core::classifier::FrnnModel;
use frnn_core::tuning::{fit_gamma, GradientDescentConfig};
use frnn_core::{synthetic, DistanceKind, KernelFamily, OwaWeightVector, RelationSpec};

fn owa(c: &mut Criterion) {
    let mut group = c.benchmark_group("owa_aggregate");
    for k in [3usize, 20, 100] {
        let w = OwaWeightVector::linear_upper(k).unwrap();
        let values: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 / 1000.0).collect();
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| {
            b.iter(|| w.aggregate(black_box(&values)).unwrap())
        });
    }
    group.finish();
}

fn relations(c: &mut Criterion) {
    let ds = synthetic::uniform_random(200, 10, 3, 10, 1);
    let mut group = c.benchmark_group("relation_evaluate");
    for kind in [
        DistanceKind::Manhattan,
        DistanceKind::Euclidean,
        DistanceKind::Canberra,
        DistanceKind::PccDistance,
        DistanceKind::Mahalanobis,
    ] {
        let rel = RelationSpec::Distance(kind).build(&ds).unwrap();
        let x = ds.features.row(0).to_vec();
        let y = ds.features.row(1).to_vec();
        group.bench_function(kind.name(), |b| {
            b.iter(|| rel.evaluate(black_box(&x), black_box(&y)).unwrap())
        });
    }
    group.finish();
}

fn predict(c: &mut Criterion) {
    let ds = synthetic::two_gaussians(500, 8, 2.0, 3);
    let mut group = c.benchmark_group("frnn_predict");
    for k in [1usize, 3, 10] {
        let rel = RelationSpec::Distance(DistanceKind::Manhattan).build(&ds).unwrap();
        let model = FrnnModel::fit(&ds, rel, k).unwrap();
        let query = ds.features.row(7).to_vec();
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| {
            b.iter(|| model.predict(black_box(&query)).unwrap())
        });
    }
    group.finish();
}

fn gamma(c: &mut Criterion) {
    let ds = synthetic::two_gaussians(150, 4, 3.0, 5);
    let cfg = GradientDescentConfig {
        max_iterations: 50,
        precision: 1e-12,
        ..GradientDescentConfig::default()
    };
    c.bench_function("fit_gamma_50_iterations", |b| {
        b.iter(|| fit_gamma(black_box(&ds), KernelFamily::Gaussian, 3, &cfg).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = owa, relations, predict, gamma
}
criterion_main!(benches);
