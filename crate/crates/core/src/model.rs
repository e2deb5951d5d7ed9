//! Model state: plain weight vectors, Gaussian (mean + covariance) weight
//! distributions and per-class weight matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BinaryLabel, FeatureVector};

/// A dense weight vector over the input space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearModel {
    weights: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        LinearModel {
            weights: vec![0.0; dim],
        }
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::config(format!("non-finite weight at index {i}")));
        }
        Ok(LinearModel { weights })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Raw score `w . x`.
    pub fn score(&self, x: &FeatureVector) -> Result<f64> {
        x.dot(&self.weights)
    }

    /// Predicted label and score; a score of exactly zero maps to the
    /// negative class.
    pub fn predict(&self, x: &FeatureVector) -> Result<(BinaryLabel, f64)> {
        let score = self.score(x)?;
        Ok((BinaryLabel::from_score(score), score))
    }

    /// Signed margin `y (w . x)`.
    pub fn margin(&self, x: &FeatureVector, y: BinaryLabel) -> Result<f64> {
        Ok(y.sign() * self.score(x)?)
    }

    /// Hinge loss `max(0, 1 - y (w . x))`.
    pub fn hinge_loss(&self, x: &FeatureVector, y: BinaryLabel) -> Result<f64> {
        Ok((1.0 - self.margin(x, y)?).max(0.0))
    }

    pub(crate) fn add_scaled(&mut self, x: &FeatureVector, coef: f64) {
        for (i, v) in x.entries() {
            self.weights[i] += coef * v;
        }
    }

    pub(crate) fn add_scaled_slice(&mut self, s: &[f64], coef: f64) {
        for (w, &v) in self.weights.iter_mut().zip(s) {
            *w += coef * v;
        }
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            *w *= factor;
        }
    }

    pub(crate) fn squared_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}

/// Covariance storage mode for second-order learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovarianceMode {
    Diagonal,
    Full,
}

/// Covariance of a Gaussian weight distribution, kept either as a diagonal
/// or as a full row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Covariance {
    Diagonal(Vec<f64>),
    Full { dim: usize, data: Vec<f64> },
}

impl Covariance {
    pub fn identity(dim: usize, mode: CovarianceMode) -> Self {
        match mode {
            CovarianceMode::Diagonal => Covariance::Diagonal(vec![1.0; dim]),
            CovarianceMode::Full => {
                let mut data = vec![0.0; dim * dim];
                for i in 0..dim {
                    data[i * dim + i] = 1.0;
                }
                Covariance::Full { dim, data }
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Covariance::Diagonal(d) => d.len(),
            Covariance::Full { dim, .. } => *dim,
        }
    }

    /// Matrix-vector product `S x` as a dense vector.
    pub fn multiply(&self, x: &FeatureVector) -> Vec<f64> {
        match self {
            Covariance::Diagonal(diag) => {
                let mut out = vec![0.0; diag.len()];
                for (i, v) in x.entries() {
                    out[i] = diag[i] * v;
                }
                out
            }
            Covariance::Full { dim, data } => {
                let mut out = vec![0.0; *dim];
                for (j, v) in x.entries() {
                    if v == 0.0 {
                        continue;
                    }
                    let col = j;
                    for i in 0..*dim {
                        out[i] += data[i * dim + col] * v;
                    }
                }
                out
            }
        }
    }

    /// Rank-one downdate `S <- S - beta s s^T`, restricted to the diagonal
    /// in diagonal mode.
    pub fn rank_one_sub(&mut self, s: &[f64], beta: f64) {
        match self {
            Covariance::Diagonal(diag) => {
                for (d, &si) in diag.iter_mut().zip(s) {
                    *d -= beta * si * si;
                }
            }
            Covariance::Full { dim, data } => {
                for i in 0..*dim {
                    for j in 0..*dim {
                        data[i * *dim + j] -= beta * s[i] * s[j];
                    }
                }
            }
        }
    }

    pub fn diagonal_entry(&self, i: usize) -> f64 {
        match self {
            Covariance::Diagonal(d) => d[i],
            Covariance::Full { dim, data } => data[i * dim + i],
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            Covariance::Diagonal(d) => {
                if i == j {
                    d[i]
                } else {
                    0.0
                }
            }
            Covariance::Full { dim, data } => data[i * dim + j],
        }
    }
}

/// Gaussian weight distribution: mean vector plus covariance, initialized
/// to zero mean and identity covariance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianLinearModel {
    mean: LinearModel,
    covariance: Covariance,
}

impl GaussianLinearModel {
    pub fn identity(dim: usize, mode: CovarianceMode) -> Self {
        GaussianLinearModel {
            mean: LinearModel::zeros(dim),
            covariance: Covariance::identity(dim, mode),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    pub fn mean(&self) -> &LinearModel {
        &self.mean
    }

    pub fn covariance(&self) -> &Covariance {
        &self.covariance
    }

    /// Predicts with the mean weight vector.
    pub fn predict(&self, x: &FeatureVector) -> Result<(BinaryLabel, f64)> {
        self.mean.predict(x)
    }

    pub(crate) fn mean_mut(&mut self) -> &mut LinearModel {
        &mut self.mean
    }

    pub(crate) fn covariance_mut(&mut self) -> &mut Covariance {
        &mut self.covariance
    }
}

/// One weight row per class, with an optional shared covariance for
/// second-order updates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MulticlassModel {
    rows: Vec<Vec<f64>>,
    covariance: Option<Covariance>,
}

impl MulticlassModel {
    pub fn zeros(num_classes: usize, dim: usize) -> Self {
        MulticlassModel {
            rows: vec![vec![0.0; dim]; num_classes],
            covariance: None,
        }
    }

    pub fn with_identity_covariance(num_classes: usize, dim: usize, mode: CovarianceMode) -> Self {
        MulticlassModel {
            rows: vec![vec![0.0; dim]; num_classes],
            covariance: Some(Covariance::identity(dim, mode)),
        }
    }

    pub fn num_classes(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn row(&self, class_index: usize) -> &[f64] {
        &self.rows[class_index]
    }

    pub fn covariance(&self) -> Option<&Covariance> {
        self.covariance.as_ref()
    }

    /// Per-class scores `W_i . x`.
    pub fn scores(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        self.rows.iter().map(|row| x.dot(row)).collect()
    }

    pub(crate) fn row_add_scaled(&mut self, class_index: usize, x: &FeatureVector, coef: f64) {
        for (i, v) in x.entries() {
            self.rows[class_index][i] += coef * v;
        }
    }

    pub(crate) fn row_add_scaled_slice(&mut self, class_index: usize, s: &[f64], coef: f64) {
        for (w, &v) in self.rows[class_index].iter_mut().zip(s) {
            *w += coef * v;
        }
    }

    pub(crate) fn covariance_mut(&mut self) -> Option<&mut Covariance> {
        self.covariance.as_mut()
    }
}
