//! Per-fold evaluation shared by the command-line driver and COMBO.
//!
//! One fold: fit a range normaliser on the training part, build the relation
//! on the normalised training data, fit FRNN, normalise and classify the test
//! part, and score the predictions with balanced accuracy. A relation that
//! cannot be built gives a missing outcome rather than an error.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::classifier::{ClassifierError, FrnnModel, NeighbourPolicy};
use crate::dataset::{DatasetError, DecisionSystem, FoldPlan, RangeNormalizer};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::relations::{RelationError, RelationSpec};
use crate::stats::{balanced_accuracy, StatsError};
use crate::tuning::{self, ComboConfig, GradientDescentConfig, TuningError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Tuning(#[from] TuningError),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MissingReason {
    RelationUndefined,
    Timeout,
}

impl MissingReason {
    pub fn code(self) -> &'static str {
        match self {
            MissingReason::RelationUndefined => "relation-undefined",
            MissingReason::Timeout => "timeout",
        }
    }
}

impl fmt::Display for MissingReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FoldOutcome {
    Accuracy(f64),
    Missing(MissingReason),
}

impl FoldOutcome {
    pub fn accuracy(&self) -> Option<f64> {
        match self {
            FoldOutcome::Accuracy(a) => Some(*a),
            FoldOutcome::Missing(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldSettings {
    pub k: usize,
    pub normalize: bool,
    pub policy: NeighbourPolicy,
}

impl Default for FoldSettings {
    fn default() -> Self {
        Self {
            k: crate::classifier::DEFAULT_NEIGHBOURS,
            normalize: true,
            policy: NeighbourPolicy::Truncate,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldEvaluation {
    pub outcome: FoldOutcome,
    /// Relation evaluations between test and training samples.
    pub pairs: u64,
    /// Free-form note, e.g. the fitted width or the COMBO winner.
    pub detail: Option<String>,
}

impl FoldEvaluation {
    fn missing(reason: MissingReason, detail: String) -> Self {
        Self {
            outcome: FoldOutcome::Missing(reason),
            pairs: 0,
            detail: Some(detail),
        }
    }
}

/// Training and test parts of `ds`, normalised on the training part if asked.
pub fn split(
    ds: &DecisionSystem,
    train_idx: &[usize],
    test_idx: &[usize],
    normalize: bool,
) -> Result<(DecisionSystem, DecisionSystem), DatasetError> {
    let train = ds.subset(train_idx);
    let test = ds.subset(test_idx);
    if !normalize {
        return Ok((train, test));
    }
    let norm = RangeNormalizer::fit(&train);
    Ok((norm.transform_system(&train)?, norm.transform_system(&test)?))
}

/// Scores a relation on an already prepared split.
pub fn evaluate_split(
    train: &DecisionSystem,
    test: &DecisionSystem,
    spec: &RelationSpec,
    settings: &FoldSettings,
) -> Result<FoldEvaluation, ExperimentError> {
    let relation = match spec.build(train) {
        Ok(r) => r,
        Err(e) => return Ok(FoldEvaluation::missing(MissingReason::RelationUndefined, e.to_string())),
    };
    let model = FrnnModel::fit_with(train, relation, settings.k, settings.policy)?;
    let predictions = model.predict_all(&test.features)?;
    Ok(FoldEvaluation {
        outcome: FoldOutcome::Accuracy(balanced_accuracy(&test.classes, &predictions)?),
        pairs: (train.n_samples() * test.n_samples()) as u64,
        detail: None,
    })
}

pub fn evaluate_fold(
    ds: &DecisionSystem,
    train_idx: &[usize],
    test_idx: &[usize],
    spec: &RelationSpec,
    settings: &FoldSettings,
) -> Result<FoldEvaluation, ExperimentError> {
    let (train, test) = split(ds, train_idx, test_idx, settings.normalize)?;
    evaluate_split(&train, &test, spec, settings)
}

/// What is evaluated on a fold: a fixed relation, a kernel whose width is
/// fitted on each training part, or COMBO selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Relation(RelationSpec),
    FittedKernel(KernelFamily),
    Combo,
}

/// Suffix marking a kernel whose width is fitted per fold.
pub const FITTED_SUFFIX: &str = "-grad";

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Relation(spec) => write!(f, "{spec}"),
            Method::FittedKernel(family) => write!(f, "{family}{FITTED_SUFFIX}"),
            Method::Combo => f.write_str("combo"),
        }
    }
}

impl FromStr for Method {
    type Err = RelationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "combo" {
            return Ok(Method::Combo);
        }
        if let Some(family) = s.strip_suffix(FITTED_SUFFIX) {
            return family
                .parse::<KernelFamily>()
                .map(Method::FittedKernel)
                .map_err(|_| RelationError::UnknownName(s.to_string()));
        }
        s.parse().map(Method::Relation)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MethodSettings {
    pub fold: FoldSettings,
    pub gd: GradientDescentConfig,
    pub combo: ComboConfig,
}

pub fn evaluate_method_fold(
    ds: &DecisionSystem,
    train_idx: &[usize],
    test_idx: &[usize],
    method: &Method,
    settings: &MethodSettings,
) -> Result<FoldEvaluation, ExperimentError> {
    let fold = &settings.fold;
    match method {
        Method::Relation(spec) => evaluate_fold(ds, train_idx, test_idx, spec, fold),
        Method::FittedKernel(family) => {
            let (train, test) = split(ds, train_idx, test_idx, fold.normalize)?;
            let gd = GradientDescentConfig {
                policy: fold.policy,
                ..settings.gd.clone()
            };
            let fit = tuning::fit_gamma(&train, *family, fold.k, &gd)?;
            let spec = RelationSpec::Kernel(KernelSpec::new(*family, fit.gamma)?);
            let mut eval = evaluate_split(&train, &test, &spec, fold)?;
            eval.detail = Some(format!("gamma={} iterations={}", fit.gamma, fit.iterations));
            Ok(eval)
        }
        Method::Combo => {
            let raw_train = ds.subset(train_idx);
            let combo = ComboConfig {
                normalize: fold.normalize,
                policy: fold.policy,
                ..settings.combo.clone()
            };
            let selection = match tuning::combo_select(&raw_train, &combo, fold.k) {
                Ok(s) => s,
                Err(TuningError::AllCandidatesFailed) => {
                    return Ok(FoldEvaluation::missing(
                        MissingReason::RelationUndefined,
                        TuningError::AllCandidatesFailed.to_string(),
                    ))
                }
                Err(e) => return Err(e.into()),
            };
            let (train, test) = split(ds, train_idx, test_idx, fold.normalize)?;
            let mut eval = evaluate_split(&train, &test, &selection.spec, fold)?;
            eval.pairs += selection.pair_evaluations;
            eval.detail = Some(format!("winner={}", selection.spec));
            Ok(eval)
        }
    }
}

/// All folds of `plan` for one relation.
pub fn cross_validate(
    ds: &DecisionSystem,
    plan: &FoldPlan,
    spec: &RelationSpec,
    settings: &FoldSettings,
) -> Result<Vec<FoldEvaluation>, ExperimentError> {
    (0..plan.n_folds())
        .map(|f| evaluate_fold(ds, &plan.train_indices(f), &plan.test_indices(f), spec, settings))
        .collect()
}

/// Mean over folds; missing if any fold is missing.
pub fn aggregate(outcomes: &[FoldOutcome]) -> Option<f64> {
    if outcomes.is_empty() {
        return None;
    }
    let mut sum = 0.0;
    for o in outcomes {
        sum += o.accuracy()?;
    }
    Some(sum / outcomes.len() as f64)
}

/// One (data set, method, fold) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub method: String,
    pub fold: usize,
    pub outcome: FoldOutcome,
    pub duration: Duration,
    pub detail: Option<String>,
}

impl RunRecord {
    pub const CSV_HEADER: &'static str = "dataset,relation,fold,balanced_accuracy,missing_reason,detail";

    /// CSV line without the wall-clock duration, so files stay reproducible.
    pub fn csv_line(&self) -> String {
        let (acc, reason) = match self.outcome {
            FoldOutcome::Accuracy(a) => (format!("{a:.6}"), String::new()),
            FoldOutcome::Missing(r) => (String::new(), r.code().to_string()),
        };
        let detail = self.detail.as_deref().unwrap_or("").replace([',', '\n'], ";");
        format!("{},{},{},{acc},{reason},{detail}", self.dataset, self.method, self.fold)
    }

    /// Human-readable line with the duration.
    pub fn display_line(&self) -> String {
        let value = match self.outcome {
            FoldOutcome::Accuracy(a) => format!("{a:.4}"),
            FoldOutcome::Missing(r) => format!("missing ({r})"),
        };
        let mut line = format!(
            "{} {} fold {}: {value} [{:.3}s]",
            self.dataset,
            self.method,
            self.fold,
            self.duration.as_secs_f64()
        );
        if let Some(d) = &self.detail {
            line.push_str(" ");
            line.push_str(&d.replace('\n', " "));
        }
        line
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureMatrix;
    use crate::relations::DistanceKind;
    use crate::synthetic;

    #[test]
    fn method_names_round_trip() {
        for s in ["man", "csmbr", "gauss", "sphere:0.5", "exp-grad", "combo"] {
            assert_eq!(s.parse::<Method>().unwrap().to_string(), s);
        }
        assert!("man-grad".parse::<Method>().is_err());
        let err = "manhattan".parse::<Method>().unwrap_err().to_string();
        assert!(err.contains("man") && err.contains("csmbr"), "{err}");
    }

    #[test]
    fn duplicated_column_makes_mahalanobis_missing() {
        let ds = synthetic::two_gaussians(60, 2, 3.0, 2);
        let rows: Vec<Vec<f64>> = ds.features.rows().map(|r| vec![r[0], r[1], r[1]]).collect();
        let ds = DecisionSystem::new(
            FeatureMatrix::from_rows(&rows).unwrap(),
            ds.classes.clone(),
            ds.class_names.clone(),
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let plan = FoldPlan::stratified(&ds, 5, 1).unwrap();
        let spec = RelationSpec::Distance(DistanceKind::Mahalanobis);
        let evals = cross_validate(&ds, &plan, &spec, &FoldSettings::default()).unwrap();
        assert!(evals
            .iter()
            .all(|e| e.outcome == FoldOutcome::Missing(MissingReason::RelationUndefined)));
        let outcomes: Vec<_> = evals.iter().map(|e| e.outcome).collect();
        assert_eq!(aggregate(&outcomes), None);
        let spec = RelationSpec::Distance(DistanceKind::Manhattan);
        let evals = cross_validate(&ds, &plan, &spec, &FoldSettings::default()).unwrap();
        assert!(evals.iter().all(|e| e.outcome.accuracy().is_some()));
    }

    #[test]
    fn aggregate_is_unweighted_mean() {
        let o = [FoldOutcome::Accuracy(0.5), FoldOutcome::Accuracy(1.0)];
        assert_eq!(aggregate(&o), Some(0.75));
        assert_eq!(aggregate(&[]), None);
    }

    #[test]
    fn fitted_and_combo_methods_run() {
        let ds = synthetic::two_gaussians(60, 2, 3.0, 3);
        let plan = FoldPlan::stratified(&ds, 3, 1).unwrap();
        let settings = MethodSettings {
            gd: GradientDescentConfig {
                max_iterations: 20,
                ..Default::default()
            },
            ..Default::default()
        };
        for m in ["gauss-grad", "combo"] {
            let method: Method = m.parse().unwrap();
            let e =
                evaluate_method_fold(&ds, &plan.train_indices(0), &plan.test_indices(0), &method, &settings).unwrap();
            assert!(e.outcome.accuracy().unwrap() > 0.7, "{m}");
            assert!(e.detail.is_some());
        }
    }

    #[test]
    fn record_lines() {
        let r = RunRecord {
            dataset: "d".into(),
            method: "man".into(),
            fold: 2,
            outcome: FoldOutcome::Missing(MissingReason::Timeout),
            duration: Duration::from_millis(5),
            detail: Some("a,b".into()),
        };
        assert_eq!(r.csv_line(), "d,man,2,,timeout,a;b");
        assert!(r.display_line().contains("missing (timeout)"));
    }
}
