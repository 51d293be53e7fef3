//! OWA-based fuzzy-rough nearest neighbours.
//!
//! For a query `v` and every class `C` the model computes
//!
//! ```text
//! upper(C) = OWA_up  ⟨ R(y, v)     | y ∈ C ⟩
//! lower(C) = OWA_low ⟨ 1 - R(y, v) | y ∉ C ⟩
//! ```
//!
//! and predicts the class with the largest `lower + upper`. This is the crisp
//! class form of the OWA fuzzy rough approximations with an implicator
//! satisfying `I(x, 0) = 1 - x`.
//!
//! The training sample is always the first argument of `R`, which only
//! matters for the class-specific Mahalanobis relation: there the matrix of
//! the training sample's class is used.

use thiserror::Error;

use crate::dataset::{DecisionSystem, FeatureMatrix};
use crate::owa::{Extremes, Orientation, OwaError, OwaWeightVector};
use crate::relations::IndiscernibilityRelation;

/// Neighbour count used throughout the reference experiments.
pub const DEFAULT_NEIGHBOURS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("k = {k} exceeds the {available} training samples {side} class `{class}`")]
    TooFewNeighbours {
        k: usize,
        class: String,
        side: &'static str,
        available: usize,
    },
    #[error("relation expects {expected} features, training data has {found}")]
    RelationDimension { expected: usize, found: usize },
    #[error("relation distinguishes {relation} classes, training data has {data}")]
    RelationClasses { relation: usize, data: usize },
    #[error("query has {found} features, model expects {expected}")]
    QueryDimension { expected: usize, found: usize },
    #[error(transparent)]
    Owa(#[from] OwaError),
}

/// How to handle classes (or complements) with fewer than `k` members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighbourPolicy {
    /// Refuse to fit.
    #[default]
    Strict,
    /// Use `min(k, available)` linear weights for that class; an empty side
    /// contributes 0 to the upper and 1 to the lower approximation.
    Truncate,
}

/// Per-class approximation memberships of one query.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ClassScores {
    pub fn n_classes(&self) -> usize {
        self.lower.len()
    }

    pub fn total(&self, class: usize) -> f64 {
        self.lower[class] + self.upper[class]
    }

    pub fn totals(&self) -> Vec<f64> {
        (0..self.n_classes()).map(|c| self.total(c)).collect()
    }

    /// Class with the largest total; ties go to the lowest index.
    pub fn best(&self) -> usize {
        let mut best = 0;
        let mut best_total = self.total(0);
        for c in 1..self.n_classes() {
            let t = self.total(c);
            if t > best_total {
                best = c;
                best_total = t;
            }
        }
        best
    }
}

#[derive(Debug, Clone)]
struct ClassWeights {
    upper: Option<OwaWeightVector>,
    lower: Option<OwaWeightVector>,
}

/// A fitted FRNN classifier. Fitting only indexes the training data.
#[derive(Debug, Clone)]
pub struct FrnnModel {
    train: DecisionSystem,
    relation: IndiscernibilityRelation,
    k: usize,
    upper_weights: OwaWeightVector,
    lower_weights: OwaWeightVector,
    per_class: Vec<ClassWeights>,
}

impl FrnnModel {
    /// Fits with [`NeighbourPolicy::Strict`].
    pub fn fit(train: &DecisionSystem, relation: IndiscernibilityRelation, k: usize) -> Result<Self, ClassifierError> {
        Self::fit_with(train, relation, k, NeighbourPolicy::Strict)
    }

    pub fn fit_with(
        train: &DecisionSystem,
        relation: IndiscernibilityRelation,
        k: usize,
        policy: NeighbourPolicy,
    ) -> Result<Self, ClassifierError> {
        let upper_weights = OwaWeightVector::linear_upper(k)?;
        let lower_weights = OwaWeightVector::linear_lower(k)?;
        if !relation.accepts_dim(train.n_features()) {
            return Err(ClassifierError::RelationDimension {
                expected: relation.dim().unwrap_or_default(),
                found: train.n_features(),
            });
        }
        if let Some(n) = relation.n_classes() {
            if n < train.n_classes() {
                return Err(ClassifierError::RelationClasses {
                    relation: n,
                    data: train.n_classes(),
                });
            }
        }
        let counts = train.class_counts();
        let n = train.n_samples();
        let mut per_class = Vec::with_capacity(counts.len());
        for (c, &inside) in counts.iter().enumerate() {
            let outside = n - inside;
            let pick = |available: usize, side: &'static str, full: &OwaWeightVector, low: bool| {
                if available >= k {
                    return Ok(Some(full.clone()));
                }
                match policy {
                    NeighbourPolicy::Strict => Err(ClassifierError::TooFewNeighbours {
                        k,
                        class: train.class_names[c].clone(),
                        side,
                        available,
                    }),
                    NeighbourPolicy::Truncate if available == 0 => Ok(None),
                    NeighbourPolicy::Truncate if low => Ok(Some(OwaWeightVector::linear_lower(available)?)),
                    NeighbourPolicy::Truncate => Ok(Some(OwaWeightVector::linear_upper(available)?)),
                }
            };
            per_class.push(ClassWeights {
                upper: pick(inside, "in", &upper_weights, false)?,
                lower: pick(outside, "outside", &lower_weights, true)?,
            });
        }
        Ok(Self {
            train: train.clone(),
            relation,
            k,
            upper_weights,
            lower_weights,
            per_class,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn relation(&self) -> &IndiscernibilityRelation {
        &self.relation
    }

    pub fn upper_weights(&self) -> &OwaWeightVector {
        &self.upper_weights
    }

    pub fn lower_weights(&self) -> &OwaWeightVector {
        &self.lower_weights
    }

    pub fn n_classes(&self) -> usize {
        self.train.n_classes()
    }

    pub fn n_train(&self) -> usize {
        self.train.n_samples()
    }

    fn check_query(&self, v: &[f64]) -> Result<(), ClassifierError> {
        if v.len() != self.train.n_features() {
            return Err(ClassifierError::QueryDimension {
                expected: self.train.n_features(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// `R(y, v)` for every training sample `y`, in training order.
    pub fn similarities(&self, v: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        self.check_query(v)?;
        Ok(self
            .train
            .features
            .rows()
            .zip(&self.train.classes)
            .map(|(y, &c)| self.relation.similarity(y, c, v))
            .collect())
    }

    pub fn class_scores(&self, v: &[f64]) -> Result<ClassScores, ClassifierError> {
        let sims = self.similarities(v)?;
        let n_classes = self.n_classes();
        let mut lower = Vec::with_capacity(n_classes);
        let mut upper = Vec::with_capacity(n_classes);
        for (c, weights) in self.per_class.iter().enumerate() {
            upper.push(match &weights.upper {
                Some(w) => {
                    let mut best = Extremes::new(w.k(), Orientation::SoftMax);
                    for (i, (&s, &cls)) in sims.iter().zip(&self.train.classes).enumerate() {
                        if cls == c {
                            best.push(s, i);
                        }
                    }
                    weighted(&best, w)
                }
                None => 0.0,
            });
            lower.push(match &weights.lower {
                Some(w) => {
                    let mut best = Extremes::new(w.k(), Orientation::SoftMin);
                    for (i, (&s, &cls)) in sims.iter().zip(&self.train.classes).enumerate() {
                        if cls != c {
                            best.push(1.0 - s, i);
                        }
                    }
                    weighted(&best, w)
                }
                None => 1.0,
            });
        }
        Ok(ClassScores { lower, upper })
    }

    pub fn predict(&self, v: &[f64]) -> Result<usize, ClassifierError> {
        Ok(self.class_scores(v)?.best())
    }

    pub fn predict_all(&self, queries: &FeatureMatrix) -> Result<Vec<usize>, ClassifierError> {
        queries.rows().map(|v| self.predict(v)).collect()
    }
}

fn weighted(selected: &Extremes, w: &OwaWeightVector) -> f64 {
    debug_assert_eq!(selected.len(), w.k());
    selected
        .items()
        .iter()
        .zip(w.applied_weights())
        .map(|(&(v, _), w)| v * w)
        .sum()
}
