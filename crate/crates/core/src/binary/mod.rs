//! Online binary classifiers with a shared predict-then-learn step.
//!
//! Every learner follows the same contract: a step predicts from the current
//! model, reveals the label, computes its family's instantaneous loss, and
//! updates only when that loss is positive. Inputs that leave an update
//! without a usable direction (for example a zero vector where the step size
//! divides by its norm) are skipped and counted instead of applied.

mod first_order;
mod second_order;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CovarianceMode, GaussianLinearModel, LinearModel};
use crate::norm::probit;
use crate::types::{require_positive, BinaryLabel, FeatureVector, Hyperparams, StepOutcome};

/// The binary learner families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryAlgorithm {
    /// Mistake-driven unit steps.
    Perceptron,
    /// Margin-driven closed-form steps, unbounded.
    Pa,
    /// Margin-driven closed-form steps, capped by the aggressiveness knob.
    PaI,
    /// Hinge subgradient with inverse-square-root rate decay.
    Ogd,
    /// Margin pursuit on normalized inputs with weight projection.
    Alma,
    /// Relaxed maximum-margin updates on mistakes.
    Romma,
    /// Gradient descent on a cost-sensitive margin target.
    Csogd,
    /// Confidence-weighted distribution updates.
    Cw,
    /// Confidence-weighted updates with a capped multiplier.
    Scw,
    /// Adaptive-regularization distribution updates.
    Arow,
    /// Adaptive-regularization updates on a cost-sensitive margin target.
    Arcsogd,
}

impl BinaryAlgorithm {
    pub const ALL: [BinaryAlgorithm; 11] = [
        BinaryAlgorithm::Perceptron,
        BinaryAlgorithm::Pa,
        BinaryAlgorithm::PaI,
        BinaryAlgorithm::Ogd,
        BinaryAlgorithm::Alma,
        BinaryAlgorithm::Romma,
        BinaryAlgorithm::Csogd,
        BinaryAlgorithm::Cw,
        BinaryAlgorithm::Scw,
        BinaryAlgorithm::Arow,
        BinaryAlgorithm::Arcsogd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BinaryAlgorithm::Perceptron => "perceptron",
            BinaryAlgorithm::Pa => "pa",
            BinaryAlgorithm::PaI => "pa1",
            BinaryAlgorithm::Ogd => "ogd",
            BinaryAlgorithm::Alma => "alma",
            BinaryAlgorithm::Romma => "romma",
            BinaryAlgorithm::Csogd => "csogd",
            BinaryAlgorithm::Cw => "cw",
            BinaryAlgorithm::Scw => "scw",
            BinaryAlgorithm::Arow => "arow",
            BinaryAlgorithm::Arcsogd => "arcsogd",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        BinaryAlgorithm::ALL
            .into_iter()
            .find(|a| a.name() == name)
            .ok_or_else(|| Error::config(format!("unknown binary algorithm '{name}'")))
    }

    /// Whether the family weighs classes by misclassification cost.
    pub fn is_cost_sensitive(self) -> bool {
        matches!(self, BinaryAlgorithm::Csogd | BinaryAlgorithm::Arcsogd)
    }

    /// Whether the family keeps a covariance besides the weight vector.
    pub fn is_second_order(self) -> bool {
        matches!(
            self,
            BinaryAlgorithm::Cw | BinaryAlgorithm::Scw | BinaryAlgorithm::Arow | BinaryAlgorithm::Arcsogd
        )
    }

    /// Whether grid search has a primary knob to move for this family.
    pub fn tunable(self) -> bool {
        !matches!(
            self,
            BinaryAlgorithm::Perceptron | BinaryAlgorithm::Pa | BinaryAlgorithm::Romma
        )
    }

    /// Maps one grid value onto the family's primary knob. Values that the
    /// knob cannot take are rejected so a sweep can record and skip them.
    pub fn apply_grid_value(self, base: &Hyperparams, value: f64) -> Result<Hyperparams> {
        require_positive("grid value", value)?;
        let base = base.clone();
        Ok(match self {
            BinaryAlgorithm::PaI | BinaryAlgorithm::Scw => base.with_aggressiveness(value),
            BinaryAlgorithm::Arow | BinaryAlgorithm::Arcsogd => base.with_regularizer(value),
            BinaryAlgorithm::Ogd | BinaryAlgorithm::Csogd => base.with_learning_rate(value),
            BinaryAlgorithm::Alma => {
                if value >= 1.0 {
                    return Err(Error::config(format!(
                        "margin slack must lie in (0, 1), got {value}"
                    )));
                }
                base.with_margin_slack(value)
            }
            // the grid value acts as the required z-score of the margin
            BinaryAlgorithm::Cw => base.with_confidence(crate::norm::normal_cdf(value)),
            BinaryAlgorithm::Perceptron | BinaryAlgorithm::Pa | BinaryAlgorithm::Romma => base,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum State {
    Plain(LinearModel),
    MarginPursuit { model: LinearModel, updates: u64 },
    RelaxedMaxMargin { model: LinearModel, norm_sq: f64 },
    Gaussian(GaussianLinearModel),
}

/// A binary online learner: algorithm tag, hyperparameters, model state and
/// stream statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryLearner {
    algo: BinaryAlgorithm,
    params: Hyperparams,
    state: State,
    confidence_z: f64,
    rounds: u64,
    positives_seen: u64,
    negatives_seen: u64,
    degenerate_events: u64,
}

impl BinaryLearner {
    /// Zero-initialized learner with a diagonal covariance where one is kept.
    pub fn new(algo: BinaryAlgorithm, dim: usize, params: Hyperparams) -> Result<Self> {
        BinaryLearner::with_covariance(algo, dim, params, CovarianceMode::Diagonal)
    }

    pub fn with_covariance(
        algo: BinaryAlgorithm,
        dim: usize,
        params: Hyperparams,
        mode: CovarianceMode,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("feature dimension must be at least 1"));
        }
        let confidence_z = validate(algo, &params)?;
        let state = match algo {
            BinaryAlgorithm::Perceptron
            | BinaryAlgorithm::Pa
            | BinaryAlgorithm::PaI
            | BinaryAlgorithm::Ogd
            | BinaryAlgorithm::Csogd => State::Plain(LinearModel::zeros(dim)),
            BinaryAlgorithm::Alma => State::MarginPursuit {
                model: LinearModel::zeros(dim),
                updates: 1,
            },
            BinaryAlgorithm::Romma => State::RelaxedMaxMargin {
                model: LinearModel::zeros(dim),
                norm_sq: 0.0,
            },
            BinaryAlgorithm::Cw
            | BinaryAlgorithm::Scw
            | BinaryAlgorithm::Arow
            | BinaryAlgorithm::Arcsogd => State::Gaussian(GaussianLinearModel::identity(dim, mode)),
        };
        Ok(BinaryLearner {
            algo,
            params,
            state,
            confidence_z,
            rounds: 0,
            positives_seen: 0,
            negatives_seen: 0,
            degenerate_events: 0,
        })
    }

    pub fn algorithm(&self) -> BinaryAlgorithm {
        self.algo
    }

    pub fn params(&self) -> &Hyperparams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        match &self.state {
            State::Plain(m)
            | State::MarginPursuit { model: m, .. }
            | State::RelaxedMaxMargin { model: m, .. } => m.dim(),
            State::Gaussian(g) => g.dim(),
        }
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Updates skipped because the input gave the step no usable direction.
    pub fn degenerate_events(&self) -> u64 {
        self.degenerate_events
    }

    /// The weight vector the learner predicts with (the mean for
    /// second-order families).
    pub fn weights(&self) -> &[f64] {
        match &self.state {
            State::Plain(m)
            | State::MarginPursuit { model: m, .. }
            | State::RelaxedMaxMargin { model: m, .. } => m.weights(),
            State::Gaussian(g) => g.mean().weights(),
        }
    }

    pub fn gaussian(&self) -> Option<&GaussianLinearModel> {
        match &self.state {
            State::Gaussian(g) => Some(g),
            _ => None,
        }
    }

    /// Predicts without learning.
    pub fn predict(&self, x: &FeatureVector) -> Result<(BinaryLabel, f64)> {
        let score = x.dot(self.weights())?;
        Ok((BinaryLabel::from_score(score), score))
    }

    /// Fingerprint of the model coefficients and update-relevant auxiliary
    /// scalars (bit patterns, not rounded values). Stream statistics such as
    /// round and class counters are excluded.
    pub fn state_digest(&self) -> u64 {
        let mut h = Fnv::new();
        match &self.state {
            State::Plain(m) => h.floats(m.weights()),
            State::MarginPursuit { model, updates } => {
                h.floats(model.weights());
                h.word(*updates);
            }
            State::RelaxedMaxMargin { model, norm_sq } => {
                h.floats(model.weights());
                h.float(*norm_sq);
            }
            State::Gaussian(g) => {
                h.floats(g.mean().weights());
                match g.covariance() {
                    crate::model::Covariance::Diagonal(d) => h.floats(d),
                    crate::model::Covariance::Full { data, .. } => h.floats(data),
                }
            }
        }
        h.finish()
    }

    /// One prequential round: predict, reveal `y`, update on positive loss.
    pub fn step(&mut self, x: &FeatureVector, y: BinaryLabel) -> Result<StepOutcome<BinaryLabel>> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        self.rounds += 1;
        match y {
            BinaryLabel::Positive => self.positives_seen += 1,
            BinaryLabel::Negative => self.negatives_seen += 1,
        }
        let round = self.rounds as usize;
        let rate = self.params.learning_rate / (self.rounds as f64).sqrt();
        let positive_target = self.params.imbalance_weight.unwrap_or_else(|| {
            if self.positives_seen > 0 && self.negatives_seen > 0 {
                self.negatives_seen as f64 / self.positives_seen as f64
            } else {
                1.0
            }
        });
        let target = match y {
            BinaryLabel::Positive => positive_target,
            BinaryLabel::Negative => 1.0,
        };
        let degenerate = &mut self.degenerate_events;
        match (&mut self.state, self.algo) {
            (State::Plain(m), BinaryAlgorithm::Perceptron) => first_order::perceptron_step(m, x, y),
            (State::Plain(m), BinaryAlgorithm::Pa) => {
                first_order::passive_aggressive_step(m, x, y, None, degenerate)
            }
            (State::Plain(m), BinaryAlgorithm::PaI) => first_order::passive_aggressive_step(
                m,
                x,
                y,
                Some(self.params.aggressiveness),
                degenerate,
            ),
            (State::Plain(m), BinaryAlgorithm::Ogd) => {
                first_order::gradient_step(m, x, y, 1.0, rate)
            }
            (State::Plain(m), BinaryAlgorithm::Csogd) => {
                first_order::gradient_step(m, x, y, target, rate)
            }
            (State::MarginPursuit { model, updates }, BinaryAlgorithm::Alma) => {
                first_order::margin_pursuit_step(
                    model,
                    updates,
                    x,
                    y,
                    self.params.margin_slack,
                    degenerate,
                )
            }
            (State::RelaxedMaxMargin { model, norm_sq }, BinaryAlgorithm::Romma) => {
                first_order::relaxed_maxmargin_step(model, norm_sq, x, y, degenerate)
            }
            (State::Gaussian(g), BinaryAlgorithm::Arow) => {
                second_order::adaptive_step(g, x, y, self.params.regularizer, 1.0, round)
            }
            (State::Gaussian(g), BinaryAlgorithm::Arcsogd) => {
                second_order::adaptive_step(g, x, y, self.params.regularizer, target, round)
            }
            (State::Gaussian(g), BinaryAlgorithm::Cw) => second_order::confidence_weighted_step(
                g,
                x,
                y,
                self.confidence_z,
                None,
                round,
                degenerate,
            ),
            (State::Gaussian(g), BinaryAlgorithm::Scw) => second_order::confidence_weighted_step(
                g,
                x,
                y,
                self.confidence_z,
                Some(self.params.aggressiveness),
                round,
                degenerate,
            ),
            _ => unreachable!("state constructed from the algorithm tag"),
        }
    }
}

fn validate(algo: BinaryAlgorithm, params: &Hyperparams) -> Result<f64> {
    if let Some(rho) = params.imbalance_weight {
        if algo.is_cost_sensitive() {
            require_positive("imbalance weight", rho)?;
        }
    }
    match algo {
        BinaryAlgorithm::PaI => require_positive("aggressiveness", params.aggressiveness)?,
        BinaryAlgorithm::Ogd | BinaryAlgorithm::Csogd => {
            require_positive("learning rate", params.learning_rate)?
        }
        BinaryAlgorithm::Alma => {
            if !(params.margin_slack > 0.0 && params.margin_slack < 1.0) {
                return Err(Error::config(format!(
                    "margin slack must lie in (0, 1), got {}",
                    params.margin_slack
                )));
            }
        }
        BinaryAlgorithm::Arow | BinaryAlgorithm::Arcsogd => {
            require_positive("regularizer", params.regularizer)?
        }
        _ => {}
    }
    match algo {
        BinaryAlgorithm::Cw | BinaryAlgorithm::Scw => {
            if params.confidence <= 0.5 {
                return Err(Error::config(format!(
                    "confidence must exceed 0.5, got {}",
                    params.confidence
                )));
            }
            if algo == BinaryAlgorithm::Scw {
                require_positive("aggressiveness", params.aggressiveness)?;
            }
            probit(params.confidence)
        }
        _ => Ok(0.0),
    }
}

/// Tiny deterministic FNV-1a accumulator for state fingerprints.
struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf29ce484222325)
    }

    fn word(&mut self, w: u64) {
        for byte in w.to_le_bytes() {
            self.0 ^= byte as u64;
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }

    fn float(&mut self, f: f64) {
        self.word(f.to_bits());
    }

    fn floats(&mut self, fs: &[f64]) {
        for &f in fs {
            self.float(f);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

pub(crate) use fnv_digest::checksum_u64s;

mod fnv_digest {
    use super::Fnv;

    /// FNV-1a over a word stream; used for stream checksums as well.
    pub(crate) fn checksum_u64s(words: impl IntoIterator<Item = u64>) -> u64 {
        let mut h = Fnv::new();
        for w in words {
            h.word(w);
        }
        h.finish()
    }
}
