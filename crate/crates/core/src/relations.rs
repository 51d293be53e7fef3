//! Indiscernibility relations.
//!
//! A distance `d` becomes a fuzzy relation through `R(x, y) = 1 - d(x, y) / s`,
//! clamped into `[0, 1]`, where `s` is the largest distance expected between
//! two range-normalised samples. For most distances `s` has a closed form
//! depending only on the dimension `n`:
//!
//! | name       | config | `s`    |
//! |------------|--------|--------|
//! | Manhattan  | `man`  | `n`    |
//! | Euclidean  | `euc`  | `√n`   |
//! | Chebyshev  | `che`  | `1`    |
//! | Canberra   | `can`  | `n`    |
//! | cosine     | `cos`  | `2`    |
//! | PCC        | `pcc`  | `2`    |
//!
//! The Mahalanobis relation (`mah`) uses the inverse training covariance and
//! takes `s` as the largest distance between two training samples. The
//! class-specific variant (`csmbr`) keeps one covariance and one scale per
//! class and evaluates `R(x, y)` with the matrix of the class of `x`; it is the
//! only asymmetric relation here.
//!
//! Kernel relations (see [`crate::kernels`]) share the same evaluation surface
//! through [`IndiscernibilityRelation::kernel`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::dataset::{DecisionSystem, FeatureMatrix};
use crate::kernels::{KernelFamily, KernelSpec};

/// Covariance matrices with a condition number above this are treated as singular.
pub const MAX_CONDITION_NUMBER: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelationError {
    #[error("relation undefined: {0}")]
    Undefined(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the class-specific relation needs the class of its first argument")]
    UnlabeledArgument,
    #[error("class index {0} is unknown to the relation")]
    UnknownClass(usize),
    #[error("gamma must be a positive finite number, got {0}")]
    InvalidGamma(f64),
    #[error("unknown relation `{0}`; valid names: {names}", names = valid_relation_names())]
    UnknownName(String),
    #[error("{0}")]
    Invalid(String),
}

/// Comma-separated list of every accepted relation name.
pub fn valid_relation_names() -> String {
    DistanceKind::ALL
        .iter()
        .map(|k| k.name())
        .chain(KernelFamily::ALL.iter().map(|k| k.name()))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    Manhattan,
    Euclidean,
    Chebyshev,
    Canberra,
    CosineDistance,
    PccDistance,
    Mahalanobis,
    ClassSpecificMahalanobis,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 8] = [
        DistanceKind::Manhattan,
        DistanceKind::Euclidean,
        DistanceKind::Chebyshev,
        DistanceKind::Canberra,
        DistanceKind::CosineDistance,
        DistanceKind::PccDistance,
        DistanceKind::Mahalanobis,
        DistanceKind::ClassSpecificMahalanobis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Manhattan => "man",
            DistanceKind::Euclidean => "euc",
            DistanceKind::Chebyshev => "che",
            DistanceKind::Canberra => "can",
            DistanceKind::CosineDistance => "cos",
            DistanceKind::PccDistance => "pcc",
            DistanceKind::Mahalanobis => "mah",
            DistanceKind::ClassSpecificMahalanobis => "csmbr",
        }
    }

    /// Largest distance between two points of `[0, 1]^n`, where one exists
    /// in closed form.
    pub fn theoretical_max(self, n_features: usize) -> Option<f64> {
        let n = n_features as f64;
        match self {
            DistanceKind::Manhattan | DistanceKind::Canberra => Some(n),
            DistanceKind::Euclidean => Some(n.sqrt()),
            DistanceKind::Chebyshev => Some(1.0),
            DistanceKind::CosineDistance | DistanceKind::PccDistance => Some(2.0),
            DistanceKind::Mahalanobis | DistanceKind::ClassSpecificMahalanobis => None,
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceKind {
    type Err = RelationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DistanceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| RelationError::UnknownName(s.to_string()))
    }
}

/// What to build: a distance relation or a kernel with a fixed width.
///
/// The text form is a distance name (`man`), a kernel name (`gauss`, width 1)
/// or a kernel name with an explicit width (`gauss:0.5`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelationSpec {
    Distance(DistanceKind),
    Kernel(KernelSpec),
}

impl RelationSpec {
    pub fn build(&self, train: &DecisionSystem) -> Result<IndiscernibilityRelation, RelationError> {
        match self {
            RelationSpec::Distance(kind) => IndiscernibilityRelation::build(*kind, train),
            RelationSpec::Kernel(spec) => Ok(IndiscernibilityRelation::kernel(*spec)),
        }
    }
}

impl fmt::Display for RelationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationSpec::Distance(kind) => write!(f, "{kind}"),
            RelationSpec::Kernel(spec) if spec.gamma() == 1.0 => write!(f, "{}", spec.family()),
            RelationSpec::Kernel(spec) => write!(f, "{}:{}", spec.family(), spec.gamma()),
        }
    }
}

impl FromStr for RelationSpec {
    type Err = RelationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(kind) = s.parse::<DistanceKind>() {
            return Ok(RelationSpec::Distance(kind));
        }
        let (name, gamma) = match s.split_once(':') {
            Some((name, g)) => (
                name,
                g.parse::<f64>()
                    .map_err(|_| RelationError::UnknownName(s.to_string()))?,
            ),
            None => (s, 1.0),
        };
        let family = name
            .parse::<KernelFamily>()
            .map_err(|_| RelationError::UnknownName(s.to_string()))?;
        Ok(RelationSpec::Kernel(KernelSpec::new(family, gamma)?))
    }
}

/// Mahalanobis distance `sqrt((x - y)ᵀ M (x - y))` stored as a factor `T`
/// with `M = TᵀT`, so that the distance is `||T (x - y)||₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct MahalanobisMetric {
    dim: usize,
    /// Row-major `dim × dim`.
    factor: Vec<f64>,
}

impl MahalanobisMetric {
    /// Metric with `M = covariance⁻¹`. Fails when the covariance is singular
    /// or its condition number exceeds [`MAX_CONDITION_NUMBER`].
    pub fn from_covariance(covariance: &DMatrix<f64>) -> Result<Self, RelationError> {
        check_square(covariance)?;
        let n = covariance.nrows();
        let eig = SymmetricEigen::new(covariance.clone());
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        if !(lo > 0.0) || hi / lo > MAX_CONDITION_NUMBER {
            return Err(RelationError::Undefined(format!(
                "singular covariance matrix (eigenvalues in [{lo:e}, {hi:e}])"
            )));
        }
        let chol = covariance
            .clone()
            .cholesky()
            .ok_or_else(|| RelationError::Undefined("singular covariance matrix".into()))?;
        // cov = L Lᵀ, so cov⁻¹ = L⁻ᵀ L⁻¹ and T = L⁻¹.
        let inv_l = chol
            .l()
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .ok_or_else(|| RelationError::Undefined("singular covariance matrix".into()))?;
        Ok(Self::from_factor(&inv_l))
    }

    /// Metric with an explicit positive definite `M`.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self, RelationError> {
        check_square(m)?;
        let chol = m
            .clone()
            .cholesky()
            .ok_or_else(|| RelationError::Invalid("matrix is not positive definite".into()))?;
        // M = L Lᵀ, so T = Lᵀ.
        Ok(Self::from_factor(&chol.l().transpose()))
    }

    /// Metric with `M` the inverse of the unbiased covariance of `rows`.
    pub fn from_data(rows: &FeatureMatrix) -> Result<Self, RelationError> {
        Self::from_covariance(&covariance(rows)?)
    }

    fn from_factor(t: &DMatrix<f64>) -> Self {
        let dim = t.nrows();
        let mut factor = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                factor.push(t[(i, j)]);
            }
        }
        Self { dim, factor }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `T x`.
    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        self.factor
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut total = 0.0;
        for row in self.factor.chunks_exact(self.dim) {
            let mut acc = 0.0;
            for ((t, a), b) in row.iter().zip(x).zip(y) {
                acc += t * (a - b);
            }
            total += acc * acc;
        }
        total.sqrt()
    }

    /// Largest distance between two rows of `rows`.
    pub fn max_pairwise(&self, rows: &FeatureMatrix) -> f64 {
        let mapped: Vec<Vec<f64>> = rows.rows().map(|r| self.transform(r)).collect();
        let mut best: f64 = 0.0;
        for i in 0..mapped.len() {
            for j in i + 1..mapped.len() {
                let d2: f64 = mapped[i].iter().zip(&mapped[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                best = best.max(d2);
            }
        }
        best.sqrt()
    }
}

fn check_square(m: &DMatrix<f64>) -> Result<(), RelationError> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(RelationError::Invalid(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Unbiased (`n - 1`) sample covariance of the rows.
pub fn covariance(rows: &FeatureMatrix) -> Result<DMatrix<f64>, RelationError> {
    let n = rows.n_rows();
    let d = rows.n_cols();
    if n < 2 {
        return Err(RelationError::Undefined(format!(
            "covariance needs at least 2 samples, got {n}"
        )));
    }
    let mut mean = vec![0.0; d];
    for row in rows.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = DMatrix::zeros(d, d);
    for row in rows.rows() {
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in i..d {
                cov[(i, j)] += di * (row[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

/// Metric and scale used for first arguments of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetric {
    pub metric: Arc<MahalanobisMetric>,
    pub scale: f64,
    /// True when the class uses the training-wide covariance.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Context {
    Plain,
    Pcc { means: Vec<f64> },
    Mahalanobis(MahalanobisMetric),
    Csmbr { classes: Vec<ClassMetric> },
}

#[derive(Debug, Clone, PartialEq)]
enum Inner {
    Distance {
        kind: DistanceKind,
        dim: usize,
        scale: f64,
        context: Context,
    },
    Kernel(KernelSpec),
}

/// An evaluable fuzzy relation `R: ℝⁿ × ℝⁿ → [0, 1]`.
///
/// Immutable once built; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct IndiscernibilityRelation {
    inner: Inner,
}

impl IndiscernibilityRelation {
    /// Builds a distance relation on range-normalised training data.
    pub fn build(kind: DistanceKind, train: &DecisionSystem) -> Result<Self, RelationError> {
        let dim = train.n_features();
        let (scale, context) = match kind {
            DistanceKind::Mahalanobis => {
                let metric = MahalanobisMetric::from_data(&train.features)?;
                let scale = metric.max_pairwise(&train.features);
                (scale, Context::Mahalanobis(metric))
            }
            DistanceKind::ClassSpecificMahalanobis => return Self::build_csmbr(train),
            DistanceKind::PccDistance => {
                let n = train.n_samples() as f64;
                let mut means = vec![0.0; dim];
                for row in train.features.rows() {
                    for (m, v) in means.iter_mut().zip(row) {
                        *m += v;
                    }
                }
                means.iter_mut().for_each(|m| *m /= n);
                (2.0, Context::Pcc { means })
            }
            _ => (kind.theoretical_max(dim).expect("closed-form maximum"), Context::Plain),
        };
        Ok(Self {
            inner: Inner::Distance {
                kind,
                dim,
                scale,
                context,
            },
        })
    }

    /// Class-specific Mahalanobis relation.
    ///
    /// A class with at most `n_features` training samples, or with a singular
    /// covariance, uses the covariance and maximal pairwise distance of the
    /// whole training set instead.
    pub fn build_csmbr(train: &DecisionSystem) -> Result<Self, RelationError> {
        let dim = train.n_features();
        let counts = train.class_counts();
        if counts.iter().filter(|&&c| c > 0).count() < 2 {
            return Err(RelationError::Undefined(
                "the class-specific relation needs at least two classes".into(),
            ));
        }
        let mut global: Option<Result<Arc<(MahalanobisMetric, f64)>, RelationError>> = None;
        let mut global_metric = || -> Result<Arc<(MahalanobisMetric, f64)>, RelationError> {
            global
                .get_or_insert_with(|| {
                    let m = MahalanobisMetric::from_data(&train.features)?;
                    let s = m.max_pairwise(&train.features);
                    Ok(Arc::new((m, s)))
                })
                .clone()
        };

        let mut classes = Vec::with_capacity(counts.len());
        for (class, &count) in counts.iter().enumerate() {
            let own = if count > dim {
                let members: Vec<usize> = (0..train.n_samples()).filter(|&i| train.classes[i] == class).collect();
                let rows = train.features.select_rows(&members);
                MahalanobisMetric::from_data(&rows)
                    .ok()
                    .map(|m| (m.max_pairwise(&rows), m))
            } else {
                None
            };
            let entry = match own {
                Some((scale, metric)) => ClassMetric {
                    metric: Arc::new(metric),
                    scale,
                    fallback: false,
                },
                None => {
                    let g = global_metric()?;
                    ClassMetric {
                        metric: Arc::new(g.0.clone()),
                        scale: g.1,
                        fallback: true,
                    }
                }
            };
            classes.push(entry);
        }
        Ok(Self {
            inner: Inner::Distance {
                kind: DistanceKind::ClassSpecificMahalanobis,
                dim,
                scale: f64::NAN,
                context: Context::Csmbr { classes },
            },
        })
    }

    /// Class-specific relation from given per-class covariance matrices and
    /// scales, indexed by class.
    pub fn csmbr_from_parts(parts: &[(DMatrix<f64>, f64)]) -> Result<Self, RelationError> {
        let dim = parts
            .first()
            .map(|(m, _)| m.nrows())
            .ok_or_else(|| RelationError::Invalid("no classes given".into()))?;
        let classes = parts
            .iter()
            .map(|(cov, scale)| {
                if cov.nrows() != dim {
                    return Err(RelationError::DimensionMismatch {
                        expected: dim,
                        found: cov.nrows(),
                    });
                }
                Ok(ClassMetric {
                    metric: Arc::new(MahalanobisMetric::from_covariance(cov)?),
                    scale: *scale,
                    fallback: false,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            inner: Inner::Distance {
                kind: DistanceKind::ClassSpecificMahalanobis,
                dim,
                scale: f64::NAN,
                context: Context::Csmbr { classes },
            },
        })
    }

    /// Mahalanobis relation with an explicit matrix `M` and scale.
    pub fn mahalanobis_from_matrix(m: &DMatrix<f64>, scale: f64) -> Result<Self, RelationError> {
        let metric = MahalanobisMetric::from_matrix(m)?;
        Ok(Self {
            inner: Inner::Distance {
                kind: DistanceKind::Mahalanobis,
                dim: metric.dim(),
                scale,
                context: Context::Mahalanobis(metric),
            },
        })
    }

    pub fn kernel(spec: KernelSpec) -> Self {
        Self {
            inner: Inner::Kernel(spec),
        }
    }

    pub fn distance_kind(&self) -> Option<DistanceKind> {
        match &self.inner {
            Inner::Distance { kind, .. } => Some(*kind),
            Inner::Kernel(_) => None,
        }
    }

    pub fn kernel_spec(&self) -> Option<&KernelSpec> {
        match &self.inner {
            Inner::Kernel(spec) => Some(spec),
            Inner::Distance { .. } => None,
        }
    }

    /// Config name of the relation (`man`, `csmbr`, `gauss`, ...).
    pub fn name(&self) -> &'static str {
        match &self.inner {
            Inner::Distance { kind, .. } => kind.name(),
            Inner::Kernel(spec) => spec.family().name(),
        }
    }

    /// Divisor applied to the distance. `None` for kernels and the class-specific
    /// relation, which has one scale per class.
    pub fn scale(&self) -> Option<f64> {
        match &self.inner {
            Inner::Distance {
                kind: DistanceKind::ClassSpecificMahalanobis,
                ..
            } => None,
            Inner::Distance { scale, .. } => Some(*scale),
            Inner::Kernel(_) => None,
        }
    }

    /// Per-class metrics of the class-specific relation.
    pub fn class_metrics(&self) -> Option<&[ClassMetric]> {
        match &self.inner {
            Inner::Distance {
                context: Context::Csmbr { classes },
                ..
            } => Some(classes),
            _ => None,
        }
    }

    /// Dimension fixed at build time; kernels accept any.
    pub fn dim(&self) -> Option<usize> {
        match &self.inner {
            Inner::Distance { dim, .. } => Some(*dim),
            Inner::Kernel(_) => None,
        }
    }

    pub fn needs_label(&self) -> bool {
        matches!(
            self.inner,
            Inner::Distance {
                kind: DistanceKind::ClassSpecificMahalanobis,
                ..
            }
        )
    }

    pub fn is_symmetric(&self) -> bool {
        !self.needs_label()
    }

    fn check(&self, x: &[f64], y: &[f64]) -> Result<(), RelationError> {
        let expected = self.dim().unwrap_or(x.len());
        for v in [x, y] {
            if v.len() != expected {
                return Err(RelationError::DimensionMismatch {
                    expected,
                    found: v.len(),
                });
            }
        }
        Ok(())
    }

    fn check_class(&self, class: usize) -> Result<(), RelationError> {
        match self.class_metrics() {
            Some(classes) if class >= classes.len() => Err(RelationError::UnknownClass(class)),
            _ => Ok(()),
        }
    }

    /// Raw distance `d(x, y)`. Errors for kernels and for the class-specific
    /// relation (use [`Self::distance_labeled`]).
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64, RelationError> {
        self.check(x, y)?;
        if self.needs_label() {
            return Err(RelationError::UnlabeledArgument);
        }
        self.raw_distance(x, None, y)
    }

    pub fn distance_labeled(&self, x: &[f64], x_class: usize, y: &[f64]) -> Result<f64, RelationError> {
        self.check(x, y)?;
        self.check_class(x_class)?;
        self.raw_distance(x, Some(x_class), y)
    }

    fn raw_distance(&self, x: &[f64], x_class: Option<usize>, y: &[f64]) -> Result<f64, RelationError> {
        match &self.inner {
            Inner::Distance { kind, context, .. } => Ok(match context {
                Context::Plain => plain_distance(*kind, x, y),
                Context::Pcc { means } => pcc_distance(means, x, y),
                Context::Mahalanobis(metric) => metric.distance(x, y),
                Context::Csmbr { classes } => {
                    let c = x_class.ok_or(RelationError::UnlabeledArgument)?;
                    classes[c].metric.distance(x, y)
                }
            }),
            Inner::Kernel(_) => Err(RelationError::Invalid("kernel relations have no distance".into())),
        }
    }

    /// `R(x, y)`. The class-specific relation requires
    /// [`Self::evaluate_labeled`].
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<f64, RelationError> {
        self.check(x, y)?;
        if self.needs_label() {
            return Err(RelationError::UnlabeledArgument);
        }
        Ok(self.similarity(x, 0, y))
    }

    /// `R(x, y)` where the class of `x` is known. Symmetric relations ignore
    /// the label.
    pub fn evaluate_labeled(&self, x: &[f64], x_class: usize, y: &[f64]) -> Result<f64, RelationError> {
        self.check(x, y)?;
        self.check_class(x_class)?;
        Ok(self.similarity(x, x_class, y))
    }

    /// Unchecked evaluation; `x_class` is only read by the class-specific relation.
    #[inline]
    pub(crate) fn similarity(&self, x: &[f64], x_class: usize, y: &[f64]) -> f64 {
        match &self.inner {
            Inner::Kernel(spec) => spec.family().value_at(euclid(x, y), spec.gamma()),
            Inner::Distance {
                kind, scale, context, ..
            } => {
                let (d, s) = match context {
                    Context::Plain => (plain_distance(*kind, x, y), *scale),
                    Context::Pcc { means } => (pcc_distance(means, x, y), *scale),
                    Context::Mahalanobis(metric) => (metric.distance(x, y), *scale),
                    Context::Csmbr { classes } => {
                        let c = &classes[x_class];
                        (c.metric.distance(x, y), c.scale)
                    }
                };
                scaled_similarity(d, s)
            }
        }
    }

    /// Validates the dimension of samples that will later be evaluated unchecked.
    pub(crate) fn accepts_dim(&self, dim: usize) -> bool {
        self.dim().is_none_or(|d| d == dim)
    }

    /// Number of classes the relation distinguishes, if any.
    pub(crate) fn n_classes(&self) -> Option<usize> {
        self.class_metrics().map(<[ClassMetric]>::len)
    }
}

#[inline]
fn scaled_similarity(d: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        (1.0 - d / scale).clamp(0.0, 1.0)
    } else if d == 0.0 {
        1.0
    } else {
        0.0
    }
}

#[inline]
fn euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn plain_distance(kind: DistanceKind, x: &[f64], y: &[f64]) -> f64 {
    let pairs = x.iter().zip(y);
    match kind {
        DistanceKind::Manhattan => pairs.map(|(a, b)| (a - b).abs()).sum(),
        DistanceKind::Euclidean => euclid(x, y),
        DistanceKind::Chebyshev => pairs.map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        DistanceKind::Canberra => pairs
            .map(|(a, b)| {
                let denom = a.abs() + b.abs();
                if denom > 0.0 {
                    (a - b).abs() / denom
                } else {
                    0.0
                }
            })
            .sum(),
        DistanceKind::CosineDistance => angular_distance(x.iter().copied(), y.iter().copied()),
        DistanceKind::PccDistance | DistanceKind::Mahalanobis | DistanceKind::ClassSpecificMahalanobis => {
            unreachable!("{kind} carries context")
        }
    }
}

fn pcc_distance(means: &[f64], x: &[f64], y: &[f64]) -> f64 {
    angular_distance(
        x.iter().zip(means).map(|(v, m)| v - m),
        y.iter().zip(means).map(|(v, m)| v - m),
    )
}

/// `1 - x·y / (||x|| ||y||)`, or 1 when either vector is zero.
fn angular_distance(x: impl Iterator<Item = f64>, y: impl Iterator<Item = f64>) -> f64 {
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for (a, b) in x.zip(y) {
        xy += a * b;
        xx += a * a;
        yy += b * b;
    }
    if xx == 0.0 || yy == 0.0 {
        return 1.0;
    }
    1.0 - xy / (xx.sqrt() * yy.sqrt())
}
