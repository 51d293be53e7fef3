#![allow(dead_code)]

use std::path::{Path, PathBuf};

use frnn_core::classifier::FrnnModel;
use frnn_core::stats::balanced_accuracy;
use frnn_core::tuning::ComboConfig;
use frnn_core::{DecisionSystem, FoldPlan, RangeNormalizer};

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn write_csv(dir: &Path, name: &str, ds: &DecisionSystem) -> PathBuf {
    let path = dir.join(format!("{name}.csv"));
    std::fs::write(&path, ds.to_csv("class")).unwrap();
    path
}

fn normalized_split(ds: &DecisionSystem, plan: &FoldPlan, fold: usize) -> (DecisionSystem, DecisionSystem) {
    let train = ds.subset(&plan.train_indices(fold));
    let test = ds.subset(&plan.test_indices(fold));
    let norm = RangeNormalizer::fit(&train);
    (
        norm.transform_system(&train).unwrap(),
        norm.transform_system(&test).unwrap(),
    )
}

/// Majority vote over the `k` nearest training samples (Euclidean), ties to
/// the lowest class index; mean balanced accuracy over the folds of `plan`.
pub fn knn_oracle(ds: &DecisionSystem, plan: &FoldPlan, k: usize) -> f64 {
    let mut total = 0.0;
    for fold in 0..plan.n_folds() {
        let (train, test) = normalized_split(ds, plan, fold);
        let mut pred = Vec::new();
        for v in test.features.rows() {
            let mut d: Vec<(f64, usize)> = train
                .features
                .rows()
                .zip(&train.classes)
                .map(|(y, &c)| (y.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), c))
                .collect();
            d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut votes = vec![0usize; ds.n_classes()];
            for &(_, c) in d.iter().take(k) {
                votes[c] += 1;
            }
            let best = (0..votes.len()).fold(0, |b, c| if votes[c] > votes[b] { c } else { b });
            pred.push(best);
        }
        total += balanced_accuracy(&test.classes, &pred).unwrap();
    }
    total / plan.n_folds() as f64
}

/// Candidate × fold loop written against the classifier directly.
/// Returns `(winner, mean scores, pair evaluations)`.
pub fn combo_brute_force(ds: &DecisionSystem, cfg: &ComboConfig, k: usize) -> (usize, Vec<f64>, u64) {
    let plan = FoldPlan::stratified(ds, cfg.inner_folds, cfg.seed).unwrap();
    let mut scores = Vec::new();
    let mut pairs = 0u64;
    for spec in &cfg.candidates {
        let mut fold_scores = Vec::new();
        for fold in 0..cfg.inner_folds {
            let (train, test) = normalized_split(ds, &plan, fold);
            match spec.build(&train) {
                Ok(rel) => {
                    let model = FrnnModel::fit_with(&train, rel, k, cfg.policy).unwrap();
                    let pred = model.predict_all(&test.features).unwrap();
                    fold_scores.push(Some(balanced_accuracy(&test.classes, &pred).unwrap()));
                    pairs += (train.n_samples() * test.n_samples()) as u64;
                }
                Err(_) => fold_scores.push(None),
            }
        }
        let n = fold_scores.len() as f64;
        scores.push(if fold_scores.iter().all(Option::is_some) {
            fold_scores.iter().flatten().sum::<f64>() / n
        } else {
            f64::NEG_INFINITY
        });
    }
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    (best, scores, pairs)
}
