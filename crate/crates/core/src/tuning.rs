//! Learning the indiscernibility relation from training data.
//!
//! [`fit_gamma`] tunes the width of a kernel relation by mini-batch gradient
//! descent on a leave-one-out cross-entropy loss. FRNN class totals
//! (`lower + upper`, each in `[0, 2]`) are normalised by their sum into class
//! probabilities. The OWA operators are piecewise linear, so the gradient is
//! taken with the neighbour selection frozen at the current `gamma`.
//!
//! [`combo_select`] treats the relation as a hyperparameter and picks the
//! candidate with the best mean balanced accuracy over inner stratified folds.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classifier::{ClassifierError, NeighbourPolicy};
use crate::dataset::{DatasetError, DecisionSystem, FoldPlan, RangeNormalizer};
use crate::experiment::{self, FoldOutcome, FoldSettings};
use crate::kernels::KernelFamily;
use crate::owa::{Extremes, Orientation, OwaWeightVector};
use crate::relations::{DistanceKind, IndiscernibilityRelation, RelationError, RelationSpec};

#[derive(Debug, Error)]
pub enum TuningError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} training samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("no COMBO candidate could be evaluated on every inner fold")]
    AllCandidatesFailed,
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Probabilities are clamped from below before taking logarithms.
pub const MIN_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientDescentConfig {
    pub initial_gamma: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub precision: f64,
    pub seed: u64,
    pub gamma_floor: f64,
    /// How classes with fewer than `k` leave-one-out neighbours are handled.
    pub policy: NeighbourPolicy,
}

impl Default for GradientDescentConfig {
    fn default() -> Self {
        Self {
            initial_gamma: 1.0,
            batch_size: 10,
            learning_rate: 0.01,
            max_iterations: 10_000,
            precision: 1e-5,
            seed: 0,
            gamma_floor: 1e-6,
            policy: NeighbourPolicy::Strict,
        }
    }
}

impl GradientDescentConfig {
    /// A zero learning rate is accepted; it stops after one iteration.
    pub fn validate(&self) -> Result<(), TuningError> {
        let bad = |m: &str| Err(TuningError::InvalidConfig(m.to_string()));
        if !(self.initial_gamma > 0.0 && self.initial_gamma.is_finite()) {
            return bad("initial_gamma must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be non-negative");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.precision > 0.0) {
            return bad("precision must be positive");
        }
        if self.precision >= self.initial_gamma {
            return bad("precision must be smaller than initial_gamma");
        }
        if !(self.gamma_floor > 0.0 && self.gamma_floor.is_finite()) {
            return bad("gamma_floor must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub iteration: usize,
    /// Width at which the batch was evaluated.
    pub gamma: f64,
    pub loss: f64,
    pub gradient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaFit {
    pub family: KernelFamily,
    pub gamma: f64,
    pub iterations: usize,
    /// Stopped because the step fell below the precision threshold.
    pub converged: bool,
    pub trace: Vec<TraceStep>,
    /// Batch samples whose class totals were all zero.
    pub uniform_fallbacks: usize,
    /// Leave-one-out loss over the whole training set at the initial width.
    pub initial_loss: f64,
    /// Same at the fitted width.
    pub final_loss: f64,
}

/// Neighbours selected for one class of one sample: `(distance, weight)`.
#[derive(Debug, Clone)]
struct FrozenClass {
    upper: Vec<(f64, f64)>,
    /// `None` when the class has no outside neighbours; the lower score is 1.
    lower: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone)]
struct FrozenSample {
    class: usize,
    classes: Vec<FrozenClass>,
}

/// Mini-batch leave-one-out loss with the neighbour selection frozen at a
/// given width. At that width [`BatchObjective::loss`] is the true batch
/// loss and [`BatchObjective::gradient`] its exact derivative wherever the
/// selection is locally constant.
#[derive(Debug, Clone)]
pub struct BatchObjective {
    family: KernelFamily,
    frozen_at: f64,
    samples: Vec<FrozenSample>,
}

struct Evaluation {
    loss: f64,
    gradient: f64,
    fallbacks: usize,
}

impl BatchObjective {
    pub fn freeze(
        train: &DecisionSystem,
        family: KernelFamily,
        k: usize,
        batch: &[usize],
        gamma: f64,
        policy: NeighbourPolicy,
    ) -> Result<Self, TuningError> {
        let n = train.n_samples();
        let n_classes = train.n_classes();
        let counts = train.class_counts();
        let weights_for = |available: usize, upper: bool, class: usize| -> Result<Option<Vec<f64>>, TuningError> {
            let size = if available >= k {
                k
            } else {
                match policy {
                    NeighbourPolicy::Strict => {
                        return Err(ClassifierError::TooFewNeighbours {
                            k,
                            class: train.class_names[class].clone(),
                            side: if upper { "in" } else { "outside" },
                            available,
                        }
                        .into())
                    }
                    NeighbourPolicy::Truncate if available == 0 => return Ok(None),
                    NeighbourPolicy::Truncate => available,
                }
            };
            let w = if upper {
                OwaWeightVector::linear_upper(size)
            } else {
                OwaWeightVector::linear_lower(size)
            }
            .map_err(ClassifierError::from)?;
            Ok(Some(w.applied_weights().collect()))
        };

        let mut samples = Vec::with_capacity(batch.len());
        let mut dist = vec![0.0; n];
        for &v in batch {
            let xv = train.features.row(v);
            for (y, d) in dist.iter_mut().enumerate() {
                *d = euclid(train.features.row(y), xv);
            }
            let own = train.classes[v];
            let mut classes = Vec::with_capacity(n_classes);
            for c in 0..n_classes {
                let inside = counts[c] - usize::from(c == own);
                let outside = n - 1 - inside;
                let mut up = Extremes::new(k.min(inside), Orientation::SoftMax);
                let mut low = Extremes::new(k.min(outside), Orientation::SoftMin);
                for y in (0..n).filter(|&y| y != v) {
                    let s = family.value_at(dist[y], gamma);
                    if train.classes[y] == c {
                        up.push(s, y);
                    } else {
                        low.push(1.0 - s, y);
                    }
                }
                let upper = match weights_for(inside, true, c)? {
                    Some(w) => up.items().iter().zip(w).map(|(&(_, y), w)| (dist[y], w)).collect(),
                    None => Vec::new(),
                };
                let lower = weights_for(outside, false, c)?
                    .map(|w| low.items().iter().zip(w).map(|(&(_, y), w)| (dist[y], w)).collect());
                classes.push(FrozenClass { upper, lower });
            }
            samples.push(FrozenSample { class: own, classes });
        }
        Ok(Self {
            family,
            frozen_at: gamma,
            samples,
        })
    }

    pub fn frozen_at(&self) -> f64 {
        self.frozen_at
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn loss(&self, gamma: f64) -> f64 {
        self.evaluate(gamma).loss
    }

    pub fn gradient(&self, gamma: f64) -> f64 {
        self.evaluate(gamma).gradient
    }

    fn evaluate(&self, gamma: f64) -> Evaluation {
        let f = self.family;
        let mut loss = 0.0;
        let mut gradient = 0.0;
        let mut fallbacks = 0;
        let mut totals = Vec::new();
        let mut slopes = Vec::new();
        for sample in &self.samples {
            totals.clear();
            slopes.clear();
            for c in &sample.classes {
                let mut t: f64 = c.upper.iter().map(|&(r, w)| w * f.value_at(r, gamma)).sum();
                let mut dt: f64 = c.upper.iter().map(|&(r, w)| w * f.gamma_derivative_at(r, gamma)).sum();
                match &c.lower {
                    Some(sel) => {
                        t += sel.iter().map(|&(r, w)| w * (1.0 - f.value_at(r, gamma))).sum::<f64>();
                        dt -= sel
                            .iter()
                            .map(|&(r, w)| w * f.gamma_derivative_at(r, gamma))
                            .sum::<f64>();
                    }
                    None => t += 1.0,
                }
                totals.push(t);
                slopes.push(dt);
            }
            let sum: f64 = totals.iter().sum();
            if sum <= 0.0 {
                fallbacks += 1;
                loss += (totals.len() as f64).ln();
                continue;
            }
            let t = totals[sample.class];
            if t / sum < MIN_PROBABILITY {
                loss -= MIN_PROBABILITY.ln();
                continue;
            }
            let dsum: f64 = slopes.iter().sum();
            loss += sum.ln() - t.ln();
            gradient += dsum / sum - slopes[sample.class] / t;
        }
        let n = self.samples.len().max(1) as f64;
        Evaluation {
            loss: loss / n,
            gradient: gradient / n,
            fallbacks,
        }
    }
}

fn euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Mean leave-one-out cross-entropy over the whole training set.
pub fn loo_loss(
    train: &DecisionSystem,
    family: KernelFamily,
    k: usize,
    gamma: f64,
    policy: NeighbourPolicy,
) -> Result<f64, TuningError> {
    let all: Vec<usize> = (0..train.n_samples()).collect();
    Ok(BatchObjective::freeze(train, family, k, &all, gamma, policy)?.loss(gamma))
}

/// Fits the kernel width by mini-batch gradient descent.
///
/// Batches are drawn without replacement from a seeded permutation of the
/// training set, reshuffled whenever fewer than `batch_size` unused samples
/// remain. Each iteration records the width it evaluated, the batch loss and
/// the gradient, then steps `γ ← max(floor, γ − lr·g)`; the loop stops once
/// the step is smaller than `precision`.
pub fn fit_gamma(
    train: &DecisionSystem,
    family: KernelFamily,
    k: usize,
    cfg: &GradientDescentConfig,
) -> Result<GammaFit, TuningError> {
    cfg.validate()?;
    let n = train.n_samples();
    let needed = cfg.batch_size.max(2);
    if n < needed {
        return Err(TuningError::TooFewSamples { needed, got: n });
    }
    if k == 0 {
        return Err(ClassifierError::from(crate::owa::OwaError::ZeroWeights).into());
    }

    let initial_loss = loo_loss(train, family, k, cfg.initial_gamma, cfg.policy)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut cursor = n;
    let mut gamma = cfg.initial_gamma;
    let mut trace = Vec::new();
    let mut fallbacks = 0;
    let mut converged = false;

    for iteration in 1..=cfg.max_iterations {
        if cursor + cfg.batch_size > n {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let batch = &order[cursor..cursor + cfg.batch_size];
        cursor += cfg.batch_size;

        let objective = BatchObjective::freeze(train, family, k, batch, gamma, cfg.policy)?;
        let eval = objective.evaluate(gamma);
        fallbacks += eval.fallbacks;
        trace.push(TraceStep {
            iteration,
            gamma,
            loss: eval.loss,
            gradient: eval.gradient,
        });
        let next = (gamma - cfg.learning_rate * eval.gradient).max(cfg.gamma_floor);
        let step = (next - gamma).abs();
        gamma = next;
        if step < cfg.precision {
            converged = true;
            break;
        }
    }

    let final_loss = loo_loss(train, family, k, gamma, cfg.policy)?;
    Ok(GammaFit {
        family,
        gamma,
        iterations: trace.len(),
        converged,
        trace,
        uniform_fallbacks: fallbacks,
        initial_loss,
        final_loss,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComboConfig {
    pub candidates: Vec<RelationSpec>,
    pub inner_folds: usize,
    pub seed: u64,
    /// Range-normalise each inner training split (and its test split).
    pub normalize: bool,
    pub policy: NeighbourPolicy,
}

impl Default for ComboConfig {
    fn default() -> Self {
        Self {
            candidates: [
                DistanceKind::Manhattan,
                DistanceKind::Euclidean,
                DistanceKind::Chebyshev,
                DistanceKind::Canberra,
                DistanceKind::CosineDistance,
                DistanceKind::PccDistance,
                DistanceKind::Mahalanobis,
            ]
            .into_iter()
            .map(RelationSpec::Distance)
            .collect(),
            inner_folds: 5,
            seed: 0,
            normalize: true,
            policy: NeighbourPolicy::Truncate,
        }
    }
}

impl ComboConfig {
    pub fn validate(&self) -> Result<(), TuningError> {
        if self.candidates.len() < 2 {
            return Err(TuningError::InvalidConfig("COMBO needs at least 2 candidates".into()));
        }
        if self.inner_folds < 2 {
            return Err(TuningError::InvalidConfig("COMBO needs at least 2 inner folds".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ComboSelection {
    /// Index of the winner in the candidate list.
    pub winner: usize,
    pub spec: RelationSpec,
    /// Mean inner balanced accuracy per candidate; `-inf` if any fold failed.
    pub scores: Vec<f64>,
    /// `fold_scores[candidate][fold]`, `None` where the candidate failed.
    pub fold_scores: Vec<Vec<Option<f64>>>,
    /// Test-train relation evaluations spent on inner cross-validation.
    pub pair_evaluations: u64,
    /// The winner rebuilt on the whole (normalised, if configured) training set.
    pub relation: IndiscernibilityRelation,
}

/// Cross-validated relation selection on `train`.
///
/// Every candidate is evaluated on the same stratified inner folds. A
/// candidate that cannot be built or evaluated on some fold scores `-inf`.
/// Ties go to the earlier candidate.
pub fn combo_select(train: &DecisionSystem, cfg: &ComboConfig, k: usize) -> Result<ComboSelection, TuningError> {
    cfg.validate()?;
    let plan = FoldPlan::stratified(train, cfg.inner_folds, cfg.seed)?;
    let settings = FoldSettings {
        k,
        normalize: cfg.normalize,
        policy: cfg.policy,
    };
    let folds: Vec<(Vec<usize>, Vec<usize>)> = (0..plan.n_folds())
        .map(|f| (plan.train_indices(f), plan.test_indices(f)))
        .collect();

    let mut pair_evaluations = 0;
    let mut fold_scores = Vec::with_capacity(cfg.candidates.len());
    let mut scores = Vec::with_capacity(cfg.candidates.len());
    for spec in &cfg.candidates {
        let mut per_fold = Vec::with_capacity(folds.len());
        for (tr, te) in &folds {
            let score = match experiment::evaluate_fold(train, tr, te, spec, &settings) {
                Ok(eval) => {
                    pair_evaluations += eval.pairs;
                    match eval.outcome {
                        FoldOutcome::Accuracy(a) => Some(a),
                        FoldOutcome::Missing(_) => None,
                    }
                }
                Err(_) => None,
            };
            per_fold.push(score);
        }
        let mean = if per_fold.iter().all(Option::is_some) {
            per_fold.iter().flatten().sum::<f64>() / per_fold.len() as f64
        } else {
            f64::NEG_INFINITY
        };
        scores.push(mean);
        fold_scores.push(per_fold);
    }

    let mut winner = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[winner] {
            winner = i;
        }
    }
    if scores[winner] == f64::NEG_INFINITY {
        return Err(TuningError::AllCandidatesFailed);
    }
    let spec = cfg.candidates[winner];
    let full = if cfg.normalize {
        RangeNormalizer::fit(train).transform_system(train)?
    } else {
        train.clone()
    };
    let relation = spec.build(&full)?;
    Ok(ComboSelection {
        winner,
        spec,
        scores,
        fold_scores,
        pair_evaluations,
        relation,
    })
}
