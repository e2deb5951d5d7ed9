//! Online multiclass classifiers over a per-class weight matrix.
//!
//! Prediction takes the highest-scoring row (ties go to the smallest class
//! id). Updates move the true-class row up and the most confusable rival row
//! down by the same amount, so the sum of all rows is invariant. The
//! cost-sensitive learner scales its margin demand by a per-pair
//! misclassification cost and shares one covariance across rows.

use serde::{Deserialize, Serialize};

use crate::confidence;
use crate::error::{Error, Result};
use crate::model::{Covariance, CovarianceMode, MulticlassModel};
use crate::norm::probit;
use crate::types::{
    require_positive, ClassLabel, CostMatrix, FeatureVector, Hyperparams, StepOutcome,
};

/// The multiclass learner families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MulticlassAlgorithm {
    /// Mistake-driven unit row swaps.
    Perceptron,
    /// Relaxed maximum-margin updates in the row-difference space.
    Romma,
    /// Hinge subgradient on the score gap with decaying rate.
    Ogd,
    /// Closed-form capped margin updates on the score gap.
    PaI,
    /// Adaptive-regularization updates with a shared covariance.
    Arow,
    /// Confidence-weighted updates with a capped multiplier.
    Scw,
    /// Adaptive-regularization updates driven by misclassification costs.
    Arcsmc,
}

impl MulticlassAlgorithm {
    pub const ALL: [MulticlassAlgorithm; 7] = [
        MulticlassAlgorithm::Perceptron,
        MulticlassAlgorithm::Romma,
        MulticlassAlgorithm::Ogd,
        MulticlassAlgorithm::PaI,
        MulticlassAlgorithm::Arow,
        MulticlassAlgorithm::Scw,
        MulticlassAlgorithm::Arcsmc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MulticlassAlgorithm::Perceptron => "perceptron",
            MulticlassAlgorithm::Romma => "romma",
            MulticlassAlgorithm::Ogd => "ogd",
            MulticlassAlgorithm::PaI => "pa1",
            MulticlassAlgorithm::Arow => "arow",
            MulticlassAlgorithm::Scw => "scw",
            MulticlassAlgorithm::Arcsmc => "arcsmc",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        MulticlassAlgorithm::ALL
            .into_iter()
            .find(|a| a.name() == name)
            .ok_or_else(|| Error::config(format!("unknown multiclass algorithm '{name}'")))
    }

    pub fn is_cost_sensitive(self) -> bool {
        matches!(self, MulticlassAlgorithm::Arcsmc)
    }

    pub fn is_second_order(self) -> bool {
        matches!(
            self,
            MulticlassAlgorithm::Arow | MulticlassAlgorithm::Scw | MulticlassAlgorithm::Arcsmc
        )
    }

    pub fn tunable(self) -> bool {
        !matches!(
            self,
            MulticlassAlgorithm::Perceptron | MulticlassAlgorithm::Romma
        )
    }

    pub fn apply_grid_value(self, base: &Hyperparams, value: f64) -> Result<Hyperparams> {
        require_positive("grid value", value)?;
        let base = base.clone();
        Ok(match self {
            MulticlassAlgorithm::PaI | MulticlassAlgorithm::Scw => {
                base.with_aggressiveness(value)
            }
            MulticlassAlgorithm::Arow | MulticlassAlgorithm::Arcsmc => {
                base.with_regularizer(value)
            }
            MulticlassAlgorithm::Ogd => base.with_learning_rate(value),
            MulticlassAlgorithm::Perceptron | MulticlassAlgorithm::Romma => base,
        })
    }
}

/// Multiclass learner state: algorithm tag, per-class rows, optional shared
/// covariance and optional cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassLearner {
    algo: MulticlassAlgorithm,
    params: Hyperparams,
    model: MulticlassModel,
    cost: Option<CostMatrix>,
    confidence_z: f64,
    literal_label_scaling: bool,
    rounds: u64,
    degenerate_events: u64,
}

pub struct MulticlassLearnerBuilder {
    algo: MulticlassAlgorithm,
    classes: usize,
    dim: usize,
    params: Hyperparams,
    mode: CovarianceMode,
    cost: Option<CostMatrix>,
    literal_label_scaling: bool,
}

impl MulticlassLearnerBuilder {
    pub fn hyperparams(mut self, params: Hyperparams) -> Self {
        self.params = params;
        self
    }

    pub fn covariance_mode(mut self, mode: CovarianceMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn cost_matrix(mut self, cost: CostMatrix) -> Self {
        self.cost = Some(cost);
        self
    }

    /// Scales each row delta by the one-based class id of the true label,
    /// mirroring a published formulation verbatim. Off by default: the
    /// scaling makes updates depend on how classes happen to be numbered.
    pub fn literal_label_scaling(mut self, on: bool) -> Self {
        self.literal_label_scaling = on;
        self
    }

    pub fn build(self) -> Result<MulticlassLearner> {
        let MulticlassLearnerBuilder {
            algo,
            classes,
            dim,
            params,
            mode,
            cost,
            literal_label_scaling,
        } = self;
        if classes < 2 {
            return Err(Error::config("need at least two classes"));
        }
        if dim == 0 {
            return Err(Error::config("feature dimension must be at least 1"));
        }
        match algo {
            MulticlassAlgorithm::PaI => require_positive("aggressiveness", params.aggressiveness)?,
            MulticlassAlgorithm::Ogd => require_positive("learning rate", params.learning_rate)?,
            MulticlassAlgorithm::Arow | MulticlassAlgorithm::Arcsmc => {
                require_positive("regularizer", params.regularizer)?
            }
            MulticlassAlgorithm::Scw => {
                require_positive("aggressiveness", params.aggressiveness)?
            }
            _ => {}
        }
        let confidence_z = if algo == MulticlassAlgorithm::Scw {
            if params.confidence <= 0.5 {
                return Err(Error::config(format!(
                    "confidence must exceed 0.5, got {}",
                    params.confidence
                )));
            }
            probit(params.confidence)?
        } else {
            0.0
        };
        match (&cost, algo.is_cost_sensitive()) {
            (None, true) => {
                return Err(Error::config(
                    "the cost-sensitive family requires a cost matrix",
                ))
            }
            (Some(_), false) => {
                return Err(Error::config(format!(
                    "algorithm '{}' does not take a cost matrix",
                    algo.name()
                )))
            }
            _ => {}
        }
        if let Some(c) = &cost {
            if c.num_classes() != classes {
                return Err(Error::DimensionMismatch {
                    expected: classes,
                    got: c.num_classes(),
                });
            }
        }
        let model = if algo.is_second_order() {
            MulticlassModel::with_identity_covariance(classes, dim, mode)
        } else {
            MulticlassModel::zeros(classes, dim)
        };
        Ok(MulticlassLearner {
            algo,
            params,
            model,
            cost,
            confidence_z,
            literal_label_scaling,
            rounds: 0,
            degenerate_events: 0,
        })
    }
}

impl MulticlassLearner {
    pub fn builder(
        algo: MulticlassAlgorithm,
        classes: usize,
        dim: usize,
    ) -> MulticlassLearnerBuilder {
        MulticlassLearnerBuilder {
            algo,
            classes,
            dim,
            params: Hyperparams::default(),
            mode: CovarianceMode::Diagonal,
            cost: None,
            literal_label_scaling: false,
        }
    }

    /// Non-cost-sensitive learner with default covariance handling.
    pub fn new(
        algo: MulticlassAlgorithm,
        classes: usize,
        dim: usize,
        params: Hyperparams,
    ) -> Result<Self> {
        MulticlassLearner::builder(algo, classes, dim)
            .hyperparams(params)
            .build()
    }

    pub fn algorithm(&self) -> MulticlassAlgorithm {
        self.algo
    }

    pub fn params(&self) -> &Hyperparams {
        &self.params
    }

    pub fn classes(&self) -> usize {
        self.model.num_classes()
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn model(&self) -> &MulticlassModel {
        &self.model
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn degenerate_events(&self) -> u64 {
        self.degenerate_events
    }

    /// Highest-scoring class and the full score vector; ties resolve to the
    /// smallest class id.
    pub fn predict(&self, x: &FeatureVector) -> Result<(ClassLabel, Vec<f64>)> {
        let scores = self.model.scores(x)?;
        let winner = argmax(&scores);
        Ok((ClassLabel::from_index(winner), scores))
    }

    /// Margin deficit against the best rival: `max(0, 1 - (s_y - s_rival))`.
    pub fn hinge_loss(&self, x: &FeatureVector, y: ClassLabel) -> Result<f64> {
        let scores = self.model.scores(x)?;
        let y_idx = self.check_label(y)?;
        let rival = argmax_excluding(&scores, y_idx);
        Ok(gap_loss(&scores, y_idx, rival, 1.0))
    }

    /// The rival class whose row scores highest among all wrong classes.
    pub fn most_confused_class(&self, x: &FeatureVector, y: ClassLabel) -> Result<ClassLabel> {
        let scores = self.model.scores(x)?;
        let y_idx = self.check_label(y)?;
        Ok(ClassLabel::from_index(argmax_excluding(&scores, y_idx)))
    }

    /// Cost-scaled margin deficit `max(0, c(y, rival) - (s_y - s_rival))`.
    pub fn cost_loss(&self, x: &FeatureVector, y: ClassLabel) -> Result<f64> {
        let cost = self.cost.as_ref().ok_or_else(|| {
            Error::config("cost-scaled loss needs a cost matrix; this learner has none")
        })?;
        let scores = self.model.scores(x)?;
        let y_idx = self.check_label(y)?;
        let rival = argmax_excluding(&scores, y_idx);
        Ok(gap_loss(&scores, y_idx, rival, cost.cost(y_idx, rival)))
    }

    /// Fingerprint of rows and covariance bit patterns.
    pub fn state_digest(&self) -> u64 {
        let mut words = Vec::new();
        for c in 0..self.model.num_classes() {
            words.extend(self.model.row(c).iter().map(|f| f.to_bits()));
        }
        if let Some(cov) = self.model.covariance() {
            match cov {
                Covariance::Diagonal(d) => words.extend(d.iter().map(|f| f.to_bits())),
                Covariance::Full { data, .. } => words.extend(data.iter().map(|f| f.to_bits())),
            }
        }
        crate::binary::checksum_u64s(words)
    }

    fn check_label(&self, y: ClassLabel) -> Result<usize> {
        if y.value() > self.classes() {
            return Err(Error::LabelSpace {
                round: self.rounds as usize,
                found: y.value().to_string(),
            });
        }
        Ok(y.index())
    }

    /// One prequential round: predict, reveal `y`, update on positive loss.
    pub fn step(&mut self, x: &FeatureVector, y: ClassLabel) -> Result<StepOutcome<ClassLabel>> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        self.rounds += 1;
        let round = self.rounds as usize;
        let y_idx = self.check_label(y)?;
        let scores = self.model.scores(x)?;
        let pred_idx = argmax(&scores);
        let predicted = ClassLabel::from_index(pred_idx);
        let score = scores[pred_idx];
        let rival = argmax_excluding(&scores, y_idx);

        let (loss, updated) = match self.algo {
            MulticlassAlgorithm::Perceptron => {
                let mistake = pred_idx != y_idx;
                if mistake {
                    self.model.row_add_scaled(y_idx, x, 1.0);
                    self.model.row_add_scaled(pred_idx, x, -1.0);
                }
                (if mistake { 1.0 } else { 0.0 }, mistake)
            }
            MulticlassAlgorithm::Ogd => {
                let loss = gap_loss(&scores, y_idx, rival, 1.0);
                let mut updated = false;
                if loss > 0.0 {
                    let rate = self.params.learning_rate / (self.rounds as f64).sqrt();
                    self.model.row_add_scaled(y_idx, x, rate);
                    self.model.row_add_scaled(rival, x, -rate);
                    updated = true;
                }
                (loss, updated)
            }
            MulticlassAlgorithm::PaI => {
                let loss = gap_loss(&scores, y_idx, rival, 1.0);
                let mut updated = false;
                if loss > 0.0 {
                    // the joint difference feature has twice the squared norm
                    let norm_sq = 2.0 * x.squared_norm();
                    if norm_sq <= 0.0 {
                        self.degenerate_events += 1;
                    } else {
                        let tau = (loss / norm_sq).min(self.params.aggressiveness);
                        self.model.row_add_scaled(y_idx, x, tau);
                        self.model.row_add_scaled(rival, x, -tau);
                        updated = true;
                    }
                }
                (loss, updated)
            }
            MulticlassAlgorithm::Romma => {
                let mistake = pred_idx != y_idx;
                let mut updated = false;
                if mistake {
                    updated = self.relaxed_update(x, y_idx, rival, &scores)?;
                }
                (if mistake { 1.0 } else { 0.0 }, mistake && updated)
            }
            MulticlassAlgorithm::Arow => {
                self.adaptive_update(x, y_idx, rival, &scores, 1.0, round)?
            }
            MulticlassAlgorithm::Arcsmc => {
                let cost = self
                    .cost
                    .as_ref()
                    .expect("cost matrix enforced at construction")
                    .cost(y_idx, rival);
                self.adaptive_update(x, y_idx, rival, &scores, cost, round)?
            }
            MulticlassAlgorithm::Scw => {
                let margin = scores[y_idx] - scores[rival];
                let z = self.confidence_z;
                let cov = self
                    .model
                    .covariance()
                    .expect("second-order model has a covariance");
                let s = cov.multiply(x);
                let v = x.dot(&s)?;
                let loss = (z * v.sqrt() - margin).max(0.0);
                let mut updated = false;
                if loss > 0.0 {
                    if v <= 0.0 {
                        self.degenerate_events += 1;
                    } else {
                        let alpha = confidence::update_multiplier(margin, v, z)
                            .min(self.params.aggressiveness);
                        if alpha > 0.0 {
                            let beta = confidence::shrink_coefficient(alpha, v, z);
                            if !(alpha.is_finite() && beta.is_finite()) {
                                return Err(Error::Numerical {
                                    round,
                                    detail: format!(
                                        "confidence-weighted step produced alpha={alpha}, beta={beta}"
                                    ),
                                });
                            }
                            self.model.row_add_scaled_slice(y_idx, &s, alpha);
                            self.model.row_add_scaled_slice(rival, &s, -alpha);
                            self.model
                                .covariance_mut()
                                .expect("second-order model")
                                .rank_one_sub(&s, beta);
                            updated = true;
                        }
                    }
                }
                (loss, updated)
            }
        };

        Ok(StepOutcome {
            predicted,
            score,
            loss,
            updated,
        })
    }

    /// Shared second-order row update: raise the true row, lower the rival,
    /// shrink the covariance. `target` is the demanded score gap.
    fn adaptive_update(
        &mut self,
        x: &FeatureVector,
        y_idx: usize,
        rival: usize,
        scores: &[f64],
        target: f64,
        round: usize,
    ) -> Result<(f64, bool)> {
        let loss = gap_loss(scores, y_idx, rival, target);
        let mut updated = false;
        if loss > 0.0 {
            let cov = self
                .model
                .covariance()
                .expect("second-order model has a covariance");
            let s = cov.multiply(x);
            let v = x.dot(&s)?;
            let beta = 1.0 / (v + self.params.regularizer);
            let alpha = loss * beta;
            if !(alpha.is_finite() && beta.is_finite()) {
                return Err(Error::Numerical {
                    round,
                    detail: format!("adaptive step produced alpha={alpha}, beta={beta}"),
                });
            }
            let row_step = if self.literal_label_scaling {
                alpha * (y_idx + 1) as f64
            } else {
                alpha
            };
            self.model.row_add_scaled_slice(y_idx, &s, row_step);
            self.model.row_add_scaled_slice(rival, &s, -row_step);
            self.model
                .covariance_mut()
                .expect("second-order model")
                .rank_one_sub(&s, beta);
            updated = true;
        }
        Ok((loss, updated))
    }

    /// Relaxed maximum-margin update carried out in the difference space
    /// `u = W_y - W_rival`, then split evenly across the two rows so their
    /// sum is conserved.
    fn relaxed_update(
        &mut self,
        x: &FeatureVector,
        y_idx: usize,
        rival: usize,
        scores: &[f64],
    ) -> Result<bool> {
        let x_sq = x.squared_norm();
        if x_sq <= 0.0 {
            self.degenerate_events += 1;
            return Ok(false);
        }
        let gap = scores[y_idx] - scores[rival];
        let u: Vec<f64> = self
            .model
            .row(y_idx)
            .iter()
            .zip(self.model.row(rival))
            .map(|(a, b)| a - b)
            .collect();
        let u_sq: f64 = u.iter().map(|w| w * w).sum();
        if u_sq == 0.0 {
            // first correction: u' = x / |x|^2, split across both rows
            let coef = 1.0 / (2.0 * x_sq);
            self.model.row_add_scaled(y_idx, x, coef);
            self.model.row_add_scaled(rival, x, -coef);
            return Ok(true);
        }
        let denom = x_sq * u_sq - gap * gap;
        if denom <= f64::EPSILON * x_sq * u_sq {
            self.degenerate_events += 1;
            return Ok(false);
        }
        let keep = (x_sq * u_sq - gap) / denom;
        let push = u_sq * (1.0 - gap) / denom;
        // u' = keep u + push x; each row moves half of (u' - u)
        let x_dense = x.to_dense();
        let deltas: Vec<f64> = u
            .iter()
            .zip(&x_dense)
            .map(|(ui, xi)| 0.5 * ((keep - 1.0) * ui + push * xi))
            .collect();
        self.model.row_add_scaled_slice(y_idx, &deltas, 1.0);
        self.model.row_add_scaled_slice(rival, &deltas, -1.0);
        Ok(true)
    }
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn argmax_excluding(scores: &[f64], skip: usize) -> usize {
    let mut best = usize::MAX;
    for (i, &s) in scores.iter().enumerate() {
        if i == skip {
            continue;
        }
        if best == usize::MAX || s > scores[best] {
            best = i;
        }
    }
    best
}

/// Margin deficit of the true score over the rival score against `target`.
fn gap_loss(scores: &[f64], y_idx: usize, rival: usize, target: f64) -> f64 {
    (target - (scores[y_idx] - scores[rival])).max(0.0)
}
