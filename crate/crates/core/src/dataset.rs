//! Decision systems and the data plumbing around them.
//!
//! A [`DecisionSystem`] pairs a dense numeric feature matrix with a crisp
//! categorical decision attribute. Systems are produced by the KEEL and CSV
//! readers in this module, normalised with a [`RangeNormalizer`] fitted on
//! training rows, and split with a stratified, seeded [`FoldPlan`].

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Errors raised while ingesting or reshaping data.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("malformed header at line {line}: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("row {row} has {found} values, expected {expected}")]
    RowArity { row: usize, found: usize, expected: usize },
    #[error("row {row}, column `{column}`: cannot parse `{token}` as a number")]
    NonNumeric { row: usize, column: String, token: String },
    #[error("row {row}, column `{column}`: missing value")]
    MissingValue { row: usize, column: String },
    #[error("the data section is empty")]
    EmptyData,
    #[error("the decision attribute has a single class")]
    SingleClass,
    #[error("no numeric conditional attributes")]
    NoFeatures,
    #[error("target column `{0}` not found in header")]
    MissingTarget(String),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("dimension mismatch: expected {expected} columns, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid decision system: {0}")]
    Invalid(String),
    #[error("cannot split {n_samples} samples into {n_folds} folds")]
    TooManyFolds { n_samples: usize, n_folds: usize },
    #[error("at least 2 folds are required, got {0}")]
    TooFewFolds(usize),
}

/// Dense row-major matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self, DatasetError> {
        if data.len() != n_rows * n_cols {
            return Err(DatasetError::Invalid(format!(
                "{} values cannot fill a {n_rows}x{n_cols} matrix",
                data.len()
            )));
        }
        Ok(Self { n_rows, n_cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, DatasetError> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(DatasetError::DimensionMismatch {
                    expected: n_cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), n_cols, data)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Copies the given rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            n_rows: indices.len(),
            n_cols: self.n_cols,
            data,
        }
    }
}

/// A numeric decision system `(U, A ∪ {b})`.
///
/// Class indices follow the order in which labels first appear in the source.
/// Subsets produced by [`DecisionSystem::subset`] keep the full label space so
/// that class indices stay comparable across folds; a subset may therefore
/// contain no member of some class.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionSystem {
    pub features: FeatureMatrix,
    pub classes: Vec<usize>,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
}

impl DecisionSystem {
    /// Validates and assembles a decision system.
    pub fn new(
        features: FeatureMatrix,
        classes: Vec<usize>,
        class_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self, DatasetError> {
        if features.n_rows() == 0 {
            return Err(DatasetError::EmptyData);
        }
        if features.n_cols() == 0 {
            return Err(DatasetError::NoFeatures);
        }
        if classes.len() != features.n_rows() {
            return Err(DatasetError::Invalid(format!(
                "{} class labels for {} samples",
                classes.len(),
                features.n_rows()
            )));
        }
        if feature_names.len() != features.n_cols() {
            return Err(DatasetError::Invalid(format!(
                "{} feature names for {} features",
                feature_names.len(),
                features.n_cols()
            )));
        }
        let mut seen = vec![false; class_names.len()];
        for &c in &classes {
            match seen.get_mut(c) {
                Some(s) => *s = true,
                None => {
                    return Err(DatasetError::Invalid(format!(
                        "class index {c} out of range for {} classes",
                        class_names.len()
                    )))
                }
            }
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(DatasetError::Invalid(format!(
                "class `{}` has no samples",
                class_names[c]
            )));
        }
        if features.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(DatasetError::Invalid("non-finite feature value".into()));
        }
        Ok(Self {
            features,
            classes,
            class_names,
            feature_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Number of samples per class index.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &c in &self.classes {
            counts[c] += 1;
        }
        counts
    }

    /// Rows at `indices` with the label space of `self`.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(indices),
            classes: indices.iter().map(|&i| self.classes[i]).collect(),
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Replaces the feature matrix, keeping labels and names.
    pub fn with_features(&self, features: FeatureMatrix) -> Result<Self, DatasetError> {
        if features.n_rows() != self.n_samples() || features.n_cols() != self.n_features() {
            return Err(DatasetError::DimensionMismatch {
                expected: self.n_features(),
                found: features.n_cols(),
            });
        }
        Ok(Self {
            features,
            ..self.clone()
        })
    }

    /// Serialises to CSV with the decision attribute as the last column.
    ///
    /// Floats are written in their shortest round-trip representation, so
    /// [`parse_csv`] reproduces the features bit for bit.
    pub fn to_csv(&self, target_column: &str) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(target_column);
        w.write_record(&header).expect("in-memory write");
        for (row, &c) in self.features.rows().zip(&self.classes) {
            let mut record: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            record.push(self.class_names[c].clone());
            w.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

fn is_missing(token: &str) -> bool {
    token.is_empty() || token == "?" || token.eq_ignore_ascii_case("<null>")
}

fn parse_number(token: &str, row: usize, column: &str) -> Result<f64, DatasetError> {
    if is_missing(token) {
        return Err(DatasetError::MissingValue {
            row,
            column: column.to_string(),
        });
    }
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(DatasetError::NonNumeric {
            row,
            column: column.to_string(),
            token: token.to_string(),
        }),
    }
}

/// Maps labels to indices in order of first appearance.
#[derive(Default)]
struct LabelIndex {
    names: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl LabelIndex {
    fn index(&mut self, label: &str) -> usize {
        if let Some(&i) = self.lookup.get(label) {
            return i;
        }
        let i = self.names.len();
        self.names.push(label.to_string());
        self.lookup.insert(label.to_string(), i);
        i
    }
}

fn assemble(
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    feature_names: Vec<String>,
) -> Result<DecisionSystem, DatasetError> {
    if rows.is_empty() {
        return Err(DatasetError::EmptyData);
    }
    if feature_names.is_empty() {
        return Err(DatasetError::NoFeatures);
    }
    if class_names.len() < 2 {
        return Err(DatasetError::SingleClass);
    }
    let features = FeatureMatrix::from_rows(&rows)?;
    DecisionSystem::new(features, labels, class_names, feature_names)
}

#[derive(Debug)]
struct KeelAttribute {
    name: String,
    numeric: bool,
}

fn parse_attribute(spec: &str, line: usize) -> Result<KeelAttribute, DatasetError> {
    let spec = spec.trim();
    let split = spec
        .find(|c: char| c.is_whitespace() || c == '{' || c == '[')
        .ok_or_else(|| DatasetError::MalformedHeader {
            line,
            reason: "attribute without a type".into(),
        })?;
    let (name, ty) = spec.split_at(split);
    let name = name.trim_matches(|c| c == '\'' || c == '"').to_string();
    let ty = ty.trim();
    if name.is_empty() || ty.is_empty() {
        return Err(DatasetError::MalformedHeader {
            line,
            reason: "attribute without a type".into(),
        });
    }
    let lowered = ty.to_ascii_lowercase();
    let numeric = if lowered.starts_with('{') {
        false
    } else if ["real", "integer", "numeric"].iter().any(|t| lowered.starts_with(t)) {
        true
    } else {
        return Err(DatasetError::MalformedHeader {
            line,
            reason: format!("unknown attribute type `{ty}`"),
        });
    };
    Ok(KeelAttribute { name, numeric })
}

/// Parses a KEEL `.dat` file.
///
/// Numeric conditional attributes become features; nominal conditional
/// attributes are dropped. The last declared attribute is the decision.
pub fn parse_keel(text: &str) -> Result<DecisionSystem, DatasetError> {
    let mut attributes: Vec<KeelAttribute> = Vec::new();
    let mut in_data = false;
    let mut saw_relation = false;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut classes = LabelIndex::default();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            if !line.starts_with('@') {
                return Err(DatasetError::MalformedHeader {
                    line: line_no,
                    reason: format!("expected a header keyword, found `{line}`"),
                });
            }
            let (keyword, rest) = line.split_once(|c: char| c.is_whitespace()).unwrap_or((line, ""));
            match keyword.to_ascii_lowercase().as_str() {
                "@relation" => saw_relation = true,
                "@attribute" => attributes.push(parse_attribute(rest, line_no)?),
                "@inputs" | "@outputs" | "@input" | "@output" => {}
                "@data" => {
                    if attributes.len() < 2 {
                        return Err(DatasetError::MalformedHeader {
                            line: line_no,
                            reason: "need at least one conditional and one decision attribute".into(),
                        });
                    }
                    in_data = true;
                }
                other => {
                    return Err(DatasetError::MalformedHeader {
                        line: line_no,
                        reason: format!("unknown keyword `{other}`"),
                    })
                }
            }
            continue;
        }

        let tokens: Vec<&str> = line.split(',').map(str::trim).collect();
        if tokens.len() != attributes.len() {
            return Err(DatasetError::RowArity {
                row: rows.len() + 1,
                found: tokens.len(),
                expected: attributes.len(),
            });
        }
        let row_no = rows.len() + 1;
        let (decision, conditional) = tokens.split_last().expect("at least two attributes");
        let mut row = Vec::with_capacity(conditional.len());
        for (tok, attr) in conditional.iter().zip(&attributes) {
            if attr.numeric {
                row.push(parse_number(tok, row_no, &attr.name)?);
            } else if is_missing(tok) {
                return Err(DatasetError::MissingValue {
                    row: row_no,
                    column: attr.name.clone(),
                });
            }
        }
        if is_missing(decision) {
            return Err(DatasetError::MissingValue {
                row: row_no,
                column: attributes.last().expect("non-empty").name.clone(),
            });
        }
        rows.push(row);
        labels.push(classes.index(decision));
    }

    if !saw_relation {
        return Err(DatasetError::MalformedHeader {
            line: 1,
            reason: "missing @relation".into(),
        });
    }
    if !in_data {
        return Err(DatasetError::MalformedHeader {
            line: text.lines().count(),
            reason: "missing @data".into(),
        });
    }
    let feature_names = attributes[..attributes.len() - 1]
        .iter()
        .filter(|a| a.numeric)
        .map(|a| a.name.clone())
        .collect();
    assemble(rows, labels, classes.names, feature_names)
}

/// Parses a headed CSV table with `target_column` as the decision attribute.
///
/// Any other column whose values all parse as finite numbers is a feature;
/// the rest are treated as categorical and dropped.
pub fn parse_csv(text: &str, target_column: &str) -> Result<DecisionSystem, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| DatasetError::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let target = header
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| DatasetError::MissingTarget(target_column.to_string()))?;

    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => DatasetError::RowArity {
                row: i + 1,
                found: *len as usize,
                expected: *expected_len as usize,
            },
            _ => DatasetError::Csv(e.to_string()),
        })?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(DatasetError::EmptyData);
    }

    for (row, rec) in records.iter().enumerate() {
        for (col, tok) in rec.iter().enumerate() {
            if is_missing(tok) {
                return Err(DatasetError::MissingValue {
                    row: row + 1,
                    column: header[col].clone(),
                });
            }
        }
    }

    let numeric: Vec<usize> = (0..header.len())
        .filter(|&c| c != target)
        .filter(|&c| records.iter().all(|r| r[c].parse::<f64>().is_ok_and(f64::is_finite)))
        .collect();

    let mut classes = LabelIndex::default();
    let mut rows = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for rec in &records {
        rows.push(
            numeric
                .iter()
                .map(|&c| rec[c].parse::<f64>().expect("checked numeric"))
                .collect(),
        );
        labels.push(classes.index(&rec[target]));
    }
    let feature_names = numeric.iter().map(|&c| header[c].clone()).collect();
    assemble(rows, labels, classes.names, feature_names)
}

/// Per-feature affine map sending the fitting set's minimum to 0 and maximum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeNormalizer {
    minimum: Vec<f64>,
    range: Vec<f64>,
}

impl RangeNormalizer {
    pub fn fit(train: &DecisionSystem) -> Self {
        Self::fit_matrix(&train.features)
    }

    pub fn fit_matrix(features: &FeatureMatrix) -> Self {
        let n = features.n_cols();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for row in features.rows() {
            for (j, &v) in row.iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let range = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
        Self { minimum: lo, range }
    }

    pub fn minimum(&self) -> &[f64] {
        &self.minimum
    }

    pub fn range(&self) -> &[f64] {
        &self.range
    }

    /// Normalises one row. Constant features map to 0; values outside the
    /// fitted range are not clamped.
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>, DatasetError> {
        if row.len() != self.minimum.len() {
            return Err(DatasetError::DimensionMismatch {
                expected: self.minimum.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.minimum.iter().zip(&self.range))
            .map(|(&v, (&lo, &r))| if r > 0.0 { (v - lo) / r } else { 0.0 })
            .collect())
    }

    pub fn transform(&self, data: &FeatureMatrix) -> Result<FeatureMatrix, DatasetError> {
        if data.n_cols() != self.minimum.len() {
            return Err(DatasetError::DimensionMismatch {
                expected: self.minimum.len(),
                found: data.n_cols(),
            });
        }
        let mut out = Vec::with_capacity(data.as_slice().len());
        for row in data.rows() {
            out.extend(self.transform_row(row)?);
        }
        FeatureMatrix::new(data.n_rows(), data.n_cols(), out)
    }

    pub fn transform_system(&self, ds: &DecisionSystem) -> Result<DecisionSystem, DatasetError> {
        ds.with_features(self.transform(&ds.features)?)
    }
}

/// Stratified assignment of samples to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    assignment: Vec<usize>,
    n_folds: usize,
    seed: u64,
}

impl FoldPlan {
    /// Builds a stratified plan.
    ///
    /// Each class's indices are shuffled with a ChaCha8 generator seeded from
    /// `seed` (classes visited in index order, one generator for the whole
    /// call) and dealt round-robin, the dealing position carrying over from
    /// one class to the next. Per-class fold counts therefore differ by at
    /// most one, and so do total fold sizes.
    pub fn stratified(ds: &DecisionSystem, n_folds: usize, seed: u64) -> Result<Self, DatasetError> {
        Self::stratified_labels(&ds.classes, ds.n_classes(), n_folds, seed)
    }

    pub fn stratified_labels(
        classes: &[usize],
        n_classes: usize,
        n_folds: usize,
        seed: u64,
    ) -> Result<Self, DatasetError> {
        if n_folds < 2 {
            return Err(DatasetError::TooFewFolds(n_folds));
        }
        if n_folds > classes.len() {
            return Err(DatasetError::TooManyFolds {
                n_samples: classes.len(),
                n_folds,
            });
        }
        let mut by_class = vec![Vec::new(); n_classes];
        for (i, &c) in classes.iter().enumerate() {
            by_class[c].push(i);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut assignment = vec![0; classes.len()];
        let mut position = 0;
        for members in &mut by_class {
            members.shuffle(&mut rng);
            for &i in members.iter() {
                assignment[i] = position % n_folds;
                position += 1;
            }
        }
        Ok(Self {
            assignment,
            n_folds,
            seed,
        })
    }

    pub fn n_folds(&self) -> usize {
        self.n_folds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Sample indices in fold `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    /// Sample indices outside fold `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }

    /// `sample,fold` CSV for inspection.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample,fold\n");
        for (i, f) in self.assignment.iter().enumerate() {
            writeln!(out, "{i},{f}").expect("string write");
        }
        out
    }
}

/// Convenience wrapper around [`FoldPlan::stratified`].
pub fn make_folds(ds: &DecisionSystem, n_folds: usize, seed: u64) -> Result<FoldPlan, DatasetError> {
    FoldPlan::stratified(ds, n_folds, seed)
}
