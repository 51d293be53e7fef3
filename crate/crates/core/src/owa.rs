//! Ordered weighted averaging with linear weights.
//!
//! An OWA operator sorts its inputs and takes a weighted sum over the sorted
//! values. Only the first `k` weights are non-zero here, so the aggregators
//! only ever look at the `k` largest (soft-max) or `k` smallest (soft-min)
//! inputs.
//!
//! Lower weights are applied with soft-min semantics: the largest weight
//! `2k / (k(k+1))` multiplies the minimum of the aggregated values, the next
//! one the second smallest, and so on. With `k = 1` the two aggregators are
//! exactly `max` and `min`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OwaError {
    #[error("the number of non-zero weights must be at least 1")]
    ZeroWeights,
    #[error("need at least {needed} values to aggregate, got {got}")]
    TooFewValues { needed: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Largest weight on the largest value (upper approximation).
    SoftMax,
    /// Largest weight on the smallest value (lower approximation).
    SoftMin,
}

/// The `k` non-zero weights of a linear OWA vector.
///
/// `weights[i]` is the weight at position `i + 1` as written in the usual
/// formula: descending for [`OwaWeightVector::linear_upper`], ascending for
/// [`OwaWeightVector::linear_lower`].
#[derive(Debug, Clone, PartialEq)]
pub struct OwaWeightVector {
    weights: Vec<f64>,
    orientation: Orientation,
}

impl OwaWeightVector {
    /// `w[i] = 2(k + 1 - i) / (k(k + 1))` for `i = 1..=k`.
    pub fn linear_upper(k: usize) -> Result<Self, OwaError> {
        if k == 0 {
            return Err(OwaError::ZeroWeights);
        }
        let denom = (k * (k + 1)) as f64;
        let weights = (1..=k).map(|i| (2 * (k + 1 - i)) as f64 / denom).collect();
        Ok(Self {
            weights,
            orientation: Orientation::SoftMax,
        })
    }

    /// `w[i] = 2i / (k(k + 1))` for `i = 1..=k`.
    pub fn linear_lower(k: usize) -> Result<Self, OwaError> {
        if k == 0 {
            return Err(OwaError::ZeroWeights);
        }
        let denom = (k * (k + 1)) as f64;
        let weights = (1..=k).map(|i| (2 * i) as f64 / denom).collect();
        Ok(Self {
            weights,
            orientation: Orientation::SoftMin,
        })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Weights in the order they multiply the selected values, i.e. the
    /// value closest to the extreme first.
    pub fn applied_weights(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.weights.len();
        (0..n).map(move |i| match self.orientation {
            Orientation::SoftMax => self.weights[i],
            Orientation::SoftMin => self.weights[n - 1 - i],
        })
    }

    /// Aggregates `values`. Needs at least `k` of them.
    pub fn aggregate(&self, values: &[f64]) -> Result<f64, OwaError> {
        let ranked = self.select(values.iter().copied())?;
        Ok(ranked.iter().zip(self.applied_weights()).map(|(v, w)| v * w).sum())
    }

    /// The `k` values the non-zero weights attach to, most extreme first:
    /// descending for soft-max, ascending for soft-min.
    pub fn select(&self, values: impl IntoIterator<Item = f64>) -> Result<Vec<f64>, OwaError> {
        let k = self.k();
        let mut best = Extremes::new(k, self.orientation);
        let mut n = 0;
        for v in values {
            best.push(v, n);
            n += 1;
        }
        if n < k {
            return Err(OwaError::TooFewValues { needed: k, got: n });
        }
        Ok(best.into_values())
    }
}

/// Bounded buffer keeping the `k` most extreme `(value, tag)` pairs seen so
/// far, sorted from most to least extreme. Insertion is stable: among equal
/// values the earlier one ranks first.
#[derive(Debug, Clone)]
pub(crate) struct Extremes {
    k: usize,
    orientation: Orientation,
    items: Vec<(f64, usize)>,
}

impl Extremes {
    pub(crate) fn new(k: usize, orientation: Orientation) -> Self {
        Self {
            k,
            orientation,
            items: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    fn before(&self, a: f64, b: f64) -> bool {
        match self.orientation {
            Orientation::SoftMax => a > b,
            Orientation::SoftMin => a < b,
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, value: f64, tag: usize) {
        if self.k == 0 {
            return;
        }
        if self.items.len() == self.k {
            let last = self.items[self.k - 1].0;
            if !self.before(value, last) {
                return;
            }
        }
        let pos = self
            .items
            .iter()
            .position(|&(v, _)| self.before(value, v))
            .unwrap_or(self.items.len());
        self.items.insert(pos, (value, tag));
        self.items.truncate(self.k);
    }

    pub(crate) fn len(&self) -> usize {
        self.items.len()
    }

    pub(crate) fn items(&self) -> &[(f64, usize)] {
        &self.items
    }

    pub(crate) fn into_values(self) -> Vec<f64> {
        self.items.into_iter().map(|(v, _)| v).collect()
    }
}

/// `k` linear upper weights.
pub fn linear_upper_weights(k: usize) -> Result<OwaWeightVector, OwaError> {
    OwaWeightVector::linear_upper(k)
}

/// `k` linear lower weights.
pub fn linear_lower_weights(k: usize) -> Result<OwaWeightVector, OwaError> {
    OwaWeightVector::linear_lower(k)
}

pub fn owa_aggregate(values: &[f64], w: &OwaWeightVector) -> Result<f64, OwaError> {
    w.aggregate(values)
}
