//! Online linear classification for class-imbalanced data streams.
//!
//! The crate implements classic first-order online learners (perceptron,
//! passive-aggressive, gradient descent, margin-pursuit and relaxed
//! maximum-margin updates), second-order confidence-weighted learners, and
//! cost-sensitive variants for both binary and multiclass problems, where a
//! per-pair misclassification cost steers updates toward rare classes.
//!
//! Evaluation follows the prequential protocol: every example is first used
//! to test the current model and only then to update it, so error counts
//! and per-class metrics describe honest streaming performance. A trial
//! harness repeats runs over seeded shuffles, and a grid-search helper
//! tunes each learner's primary knob on a validation prefix.

pub mod binary;
mod confidence;
pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod multiclass;
mod norm;
pub mod types;

pub use binary::{BinaryAlgorithm, BinaryLearner};
pub use error::{Error, Result};
pub use multiclass::{MulticlassAlgorithm, MulticlassLearner};
pub use types::{BinaryLabel, ClassLabel, CostMatrix, FeatureVector, Hyperparams};
