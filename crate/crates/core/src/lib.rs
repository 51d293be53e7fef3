//! Fuzzy-rough nearest neighbour (FRNN) classification with OWA-based
//! approximations and a catalogue of indiscernibility relations.
//!
//! The crate is organised bottom-up:
//!
//! * [`dataset`]: decision systems, KEEL/CSV ingestion, range normalisation and
//!   stratified fold plans.
//! * [`owa`]: linear OWA weight vectors and the soft-max / soft-min aggregators.
//! * [`relations`]: distance-based relations, Mahalanobis and the asymmetric
//!   class-specific Mahalanobis relation (CSMBR).
//! * [`kernels`]: kernel relations and their derivatives in `gamma`.
//! * [`classifier`]: the FRNN decision rule.
//! * [`tuning`]: gradient-descent fitting of kernel `gamma` and cross-validated
//!   relation selection (COMBO).
//! * [`stats`]: balanced accuracy, Wilcoxon, Friedman, Conover/Holm and deficit
//!   summaries.
//! * [`experiment`]: the per-fold evaluation pipeline shared by the CLI and the
//!   tuning code.
//!
//! ```
//! use frnn_core::{synthetic, classifier, FrnnModel, IndiscernibilityRelation, DistanceKind, RangeNormalizer};
//!
//! let ds = synthetic::two_gaussians(60, 2, 3.0, 1);
//! let norm = RangeNormalizer::fit(&ds);
//! let train = norm.transform_system(&ds).unwrap();
//! let relation = IndiscernibilityRelation::build(DistanceKind::Manhattan, &train).unwrap();
//! let model = FrnnModel::fit(&train, relation, classifier::DEFAULT_NEIGHBOURS).unwrap();
//! let label = model.predict(train.features.row(0)).unwrap();
//! assert!(label < 2);
//! ```

pub mod classifier;
pub mod dataset;
pub mod experiment;
pub mod kernels;
pub mod owa;
pub mod relations;
pub mod stats;
pub mod synthetic;
pub mod tuning;

pub use classifier::{ClassScores, ClassifierError, FrnnModel, NeighbourPolicy};
pub use dataset::{DatasetError, DecisionSystem, FeatureMatrix, FoldPlan, RangeNormalizer};
pub use experiment::{FoldOutcome, MissingReason, RunRecord};
pub use kernels::{KernelFamily, KernelSpec};
pub use owa::{Orientation, OwaError, OwaWeightVector};
pub use relations::{DistanceKind, IndiscernibilityRelation, RelationError, RelationSpec};
pub use stats::{ComparisonReport, MissingPolicy, ResultMatrix, StatsError};
pub use tuning::{ComboConfig, GradientDescentConfig, TuningError};
