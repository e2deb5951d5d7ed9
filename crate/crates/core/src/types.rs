//! Shared value types: feature vectors, labels, cost matrices and
//! hyperparameter bundles.
//!
//! Feature vectors are immutable once constructed. Dense and sparse
//! representations of the same data are interchangeable everywhere a
//! `FeatureVector` is accepted and compare equal under `PartialEq`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed-dimension input vector, either dense or sparse.
///
/// Sparse entries are stored with strictly increasing zero-based indices.
#[derive(Debug, Clone)]
pub enum FeatureVector {
    Dense(Vec<f64>),
    Sparse {
        dim: usize,
        indices: Vec<u32>,
        values: Vec<f64>,
    },
}

impl FeatureVector {
    pub fn dense(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::config(format!(
                "non-finite feature value at index {i}"
            )));
        }
        Ok(FeatureVector::Dense(values))
    }

    /// Builds a sparse vector from `(index, value)` pairs. Pairs may arrive
    /// in any order; duplicate or out-of-range indices are rejected.
    pub fn sparse(dim: usize, mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_unstable_by_key(|&(i, _)| i);
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for &(i, v) in &entries {
            if i >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: i + 1,
                });
            }
            if indices.last() == Some(&(i as u32)) {
                return Err(Error::config(format!("duplicate feature index {i}")));
            }
            if !v.is_finite() {
                return Err(Error::config(format!(
                    "non-finite feature value at index {i}"
                )));
            }
            indices.push(i as u32);
            values.push(v);
        }
        Ok(FeatureVector::Sparse {
            dim,
            indices,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeatureVector::Dense(v) => v.len(),
            FeatureVector::Sparse { dim, .. } => *dim,
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        match self {
            FeatureVector::Dense(v) => v[i],
            FeatureVector::Sparse {
                indices, values, ..
            } => match indices.binary_search(&(i as u32)) {
                Ok(pos) => values[pos],
                Err(_) => 0.0,
            },
        }
    }

    /// Iterates over stored entries as `(index, value)`. For dense vectors
    /// every component is visited; for sparse vectors only stored entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (dense, sparse): (Option<&[f64]>, Option<(&[u32], &[f64])>) = match self {
            FeatureVector::Dense(v) => (Some(v.as_slice()), None),
            FeatureVector::Sparse {
                indices, values, ..
            } => (None, Some((indices.as_slice(), values.as_slice()))),
        };
        dense
            .into_iter()
            .flat_map(|v| v.iter().copied().enumerate())
            .chain(sparse.into_iter().flat_map(|(idx, val)| {
                idx.iter()
                    .zip(val.iter())
                    .map(|(&i, &v)| (i as usize, v))
            }))
    }

    /// Inner product with a dense weight slice of matching dimension.
    pub fn dot(&self, weights: &[f64]) -> Result<f64> {
        if weights.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                got: self.dim(),
            });
        }
        Ok(match self {
            FeatureVector::Dense(v) => v.iter().zip(weights).map(|(a, b)| a * b).sum(),
            FeatureVector::Sparse {
                indices, values, ..
            } => indices
                .iter()
                .zip(values)
                .map(|(&i, &v)| weights[i as usize] * v)
                .sum(),
        })
    }

    pub fn squared_norm(&self) -> f64 {
        match self {
            FeatureVector::Dense(v) => v.iter().map(|a| a * a).sum(),
            FeatureVector::Sparse { values, .. } => values.iter().map(|a| a * a).sum(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            FeatureVector::Dense(v) => v.clone(),
            FeatureVector::Sparse {
                dim,
                indices,
                values,
            } => {
                let mut out = vec![0.0; *dim];
                for (&i, &v) in indices.iter().zip(values) {
                    out[i as usize] = v;
                }
                out
            }
        }
    }
}

impl PartialEq for FeatureVector {
    /// Value equality: a dense vector and a sparse vector holding the same
    /// components compare equal.
    fn eq(&self, other: &Self) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        (0..self.dim()).all(|i| self.get(i) == other.get(i))
    }
}

/// Binary class label; scores of exactly zero predict `Negative`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryLabel {
    Positive,
    Negative,
}

impl BinaryLabel {
    pub fn from_score(score: f64) -> Self {
        if score > 0.0 {
            BinaryLabel::Positive
        } else {
            BinaryLabel::Negative
        }
    }

    pub fn from_value(value: i64) -> Result<Self> {
        match value {
            1 => Ok(BinaryLabel::Positive),
            -1 => Ok(BinaryLabel::Negative),
            other => Err(Error::config(format!(
                "binary label must be +1 or -1, got {other}"
            ))),
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            BinaryLabel::Positive => 1.0,
            BinaryLabel::Negative => -1.0,
        }
    }

    pub fn value(self) -> i64 {
        match self {
            BinaryLabel::Positive => 1,
            BinaryLabel::Negative => -1,
        }
    }
}

/// Multiclass label holding a one-based class id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassLabel(usize);

impl ClassLabel {
    pub fn new(value: usize, num_classes: usize) -> Result<Self> {
        if value == 0 || value > num_classes {
            return Err(Error::config(format!(
                "class label {value} outside 1..={num_classes}"
            )));
        }
        Ok(ClassLabel(value))
    }

    /// One-based class id.
    pub fn value(self) -> usize {
        self.0
    }

    /// Zero-based row index.
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn from_index(index: usize) -> Self {
        ClassLabel(index + 1)
    }
}

/// Square misclassification-cost matrix with a zero diagonal and strictly
/// positive off-diagonal entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    num_classes: usize,
    costs: Vec<f64>,
}

impl CostMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k < 2 {
            return Err(Error::config("cost matrix needs at least two classes"));
        }
        let mut costs = Vec::with_capacity(k * k);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: row.len(),
                });
            }
            for (j, &c) in row.iter().enumerate() {
                if i == j && c != 0.0 {
                    return Err(Error::config(format!(
                        "cost matrix diagonal entry ({i},{j}) must be zero"
                    )));
                }
                if i != j && !(c.is_finite() && c > 0.0) {
                    return Err(Error::config(format!(
                        "cost matrix entry ({i},{j}) must be strictly positive, got {c}"
                    )));
                }
                costs.push(c);
            }
        }
        Ok(CostMatrix {
            num_classes: k,
            costs,
        })
    }

    /// Uniform matrix: every mistake costs one.
    pub fn unit(num_classes: usize) -> Result<Self> {
        let rows = (0..num_classes)
            .map(|i| {
                (0..num_classes)
                    .map(|j| if i == j { 0.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        CostMatrix::from_rows(rows)
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Cost of predicting class index `predicted` when the truth is `truth`
    /// (both zero-based).
    pub fn cost(&self, truth: usize, predicted: usize) -> f64 {
        self.costs[truth * self.num_classes + predicted]
    }
}

/// Knobs shared by every learner family. Each family reads only the fields
/// it understands and validates them at construction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Update-size cap for the capped passive-aggressive variant and the
    /// soft confidence-weighted family.
    pub aggressiveness: f64,
    /// Confidence regularizer for the adaptive second-order family.
    pub regularizer: f64,
    /// Base learning rate for gradient-descent updates (decayed by the
    /// inverse square root of the round number).
    pub learning_rate: f64,
    /// Margin target for the positive class in cost-sensitive gradient
    /// learners. `None` tracks the running negative-to-positive ratio.
    pub imbalance_weight: Option<f64>,
    /// Confidence level in (0.5, 1) for confidence-weighted updates.
    pub confidence: f64,
    /// Approximation level in (0, 1] for margin-pursuit updates; 1 demands
    /// only correctness, smaller values chase a larger margin.
    pub margin_slack: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            aggressiveness: 1.0,
            regularizer: 1.0,
            learning_rate: 0.1,
            imbalance_weight: None,
            confidence: 0.75,
            margin_slack: 0.9,
        }
    }
}

impl Hyperparams {
    pub fn with_aggressiveness(mut self, c: f64) -> Self {
        self.aggressiveness = c;
        self
    }

    pub fn with_regularizer(mut self, gamma: f64) -> Self {
        self.regularizer = gamma;
        self
    }

    pub fn with_learning_rate(mut self, rate: f64) -> Self {
        self.learning_rate = rate;
        self
    }

    pub fn with_imbalance_weight(mut self, weight: Option<f64>) -> Self {
        self.imbalance_weight = weight;
        self
    }

    pub fn with_confidence(mut self, eta: f64) -> Self {
        self.confidence = eta;
        self
    }

    pub fn with_margin_slack(mut self, alpha: f64) -> Self {
        self.margin_slack = alpha;
        self
    }
}

/// What one predict-then-learn round produced: the prediction made before
/// the update, the raw score behind it, the instantaneous loss, and whether
/// the model changed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome<L> {
    pub predicted: L,
    pub score: f64,
    pub loss: f64,
    pub updated: bool,
}

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!(
            "{name} must be strictly positive, got {value}"
        )))
    }
}
