use approx::assert_relative_eq;
use proptest::prelude::*;

use frnn_core::classifier::FrnnModel;
use frnn_core::dataset::{parse_csv, parse_keel};
use frnn_core::experiment::{aggregate, cross_validate, FoldOutcome, FoldSettings};
use frnn_core::{
    synthetic, DecisionSystem, DistanceKind, FoldPlan, KernelFamily, KernelSpec, NeighbourPolicy, RangeNormalizer,
    RelationSpec,
};

/// Class scores written out from the rule itself: the mean of the `k` largest
/// in-class similarities weighted 2(k+1-i)/(k(k+1)) plus the lower
/// approximation over the `k` largest out-of-class similarities, where the
/// largest weight goes to the smallest `1 - R`.
fn oracle_scores(sims: &[f64], classes: &[usize], n_classes: usize, k: usize) -> Vec<f64> {
    let denom = (k * (k + 1)) as f64;
    (0..n_classes)
        .map(|c| {
            let mut inside: Vec<f64> = sims
                .iter()
                .zip(classes)
                .filter(|(_, &y)| y == c)
                .map(|(s, _)| *s)
                .collect();
            let mut outside: Vec<f64> = sims
                .iter()
                .zip(classes)
                .filter(|(_, &y)| y != c)
                .map(|(s, _)| *s)
                .collect();
            inside.sort_by(|a, b| b.total_cmp(a));
            outside.sort_by(|a, b| b.total_cmp(a));
            let upper: f64 = (0..k).map(|i| 2.0 * (k - i) as f64 / denom * inside[i]).sum();
            // outside[0] is the most similar, so 1 - outside[0] is the minimum.
            let lower: f64 = (0..k).map(|i| 2.0 * (k - i) as f64 / denom * (1.0 - outside[i])).sum();
            upper + lower
        })
        .collect()
}

fn check_against_oracle(ds: &DecisionSystem, spec: &RelationSpec, k: usize) {
    let plan = FoldPlan::stratified(ds, 4, 1).unwrap();
    let train = ds.subset(&plan.train_indices(0));
    let test = ds.subset(&plan.test_indices(0));
    let rel = spec.build(&train).unwrap();
    let model = FrnnModel::fit(&train, rel.clone(), k).unwrap();
    for v in test.features.rows() {
        let sims: Vec<f64> = train.features.rows().map(|y| rel.evaluate(y, v).unwrap()).collect();
        let expected = oracle_scores(&sims, &train.classes, train.n_classes(), k);
        let got = model.class_scores(v).unwrap().totals();
        for (g, e) in got.iter().zip(&expected) {
            assert_relative_eq!(*g, *e, epsilon = 1e-12);
        }
    }
}

#[test]
fn scores_match_the_written_out_rule() {
    let ds = synthetic::uniform_random(80, 4, 3, 10, 17);
    for spec in [
        RelationSpec::Distance(DistanceKind::Manhattan),
        RelationSpec::Distance(DistanceKind::Canberra),
        RelationSpec::Distance(DistanceKind::CosineDistance),
        RelationSpec::Distance(DistanceKind::Mahalanobis),
        RelationSpec::Kernel(KernelSpec::new(KernelFamily::Exponential, 0.3).unwrap()),
    ] {
        for k in [2, 5] {
            check_against_oracle(&ds, &spec, k);
        }
    }
}

const KEEL: &str = "\
@relation toy
@attribute a real [0.0, 10.0]
@attribute colour {red, blue}
@attribute b integer [0, 5]
@attribute class {yes, no}
@inputs a, colour, b
@outputs class
@data
1.0, red, 2, yes
2.0, blue, 3, yes
1.5, red, 1, yes
8.0, blue, 4, no
9.0, red, 5, no
8.5, blue, 4, no
";

#[test]
fn keel_and_csv_agree() {
    let keel = parse_keel(KEEL).unwrap();
    assert_eq!(keel.n_features(), 2);
    assert_eq!(keel.class_counts(), vec![3, 3]);
    let csv = parse_csv(&keel.to_csv("class"), "class").unwrap();
    assert_eq!(csv.features, keel.features);
    assert_eq!(csv.classes, keel.classes);

    let rel = RelationSpec::Distance(DistanceKind::Euclidean).build(&keel).unwrap();
    let model = FrnnModel::fit(&keel, rel, 2).unwrap();
    assert_eq!(model.predict(&[1.2, 2.0]).unwrap(), 0);
    assert_eq!(model.predict(&[8.7, 4.5]).unwrap(), 1);
}

#[test]
fn normalisation_uses_training_ranges_only() {
    let ds = synthetic::two_gaussians(40, 2, 2.0, 3);
    let plan = FoldPlan::stratified(&ds, 5, 0).unwrap();
    let train = ds.subset(&plan.train_indices(0));
    let norm = RangeNormalizer::fit(&train);
    let t = norm.transform_system(&train).unwrap();
    for j in 0..t.n_features() {
        let col: Vec<f64> = t.features.rows().map(|r| r[j]).collect();
        assert_relative_eq!(col.iter().cloned().fold(f64::INFINITY, f64::min), 0.0, epsilon = 1e-12);
        assert_relative_eq!(
            col.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            1.0,
            epsilon = 1e-12
        );
    }
}

#[test]
fn cross_validation_covers_every_sample_once() {
    let ds = synthetic::uniform_random(57, 3, 4, 5, 8);
    let plan = FoldPlan::stratified(&ds, 5, 2).unwrap();
    let mut seen = vec![0; ds.n_samples()];
    for f in 0..plan.n_folds() {
        for i in plan.test_indices(f) {
            seen[i] += 1;
        }
    }
    assert!(seen.iter().all(|&c| c == 1));
    let settings = FoldSettings {
        k: 3,
        normalize: true,
        policy: NeighbourPolicy::Truncate,
    };
    let folds = cross_validate(&ds, &plan, &RelationSpec::Distance(DistanceKind::Chebyshev), &settings).unwrap();
    let pairs: u64 = folds.iter().map(|f| f.pairs).sum();
    let expected: u64 = plan
        .fold_sizes()
        .iter()
        .map(|&s| (s * (ds.n_samples() - s)) as u64)
        .sum();
    assert_eq!(pairs, expected);
    let outcomes: Vec<FoldOutcome> = folds.into_iter().map(|f| f.outcome).collect();
    let acc = aggregate(&outcomes).unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn oracle_agreement_on_random_data(seed in 0u64..10_000, k in 1usize..4, classes in 2usize..4) {
        let ds = synthetic::uniform_random(48, 3, classes, 8, seed);
        check_against_oracle(&ds, &RelationSpec::Distance(DistanceKind::Euclidean), k);
    }
}
