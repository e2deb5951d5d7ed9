//! Seeded generator for imbalanced linear-class streams.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BinaryLabel, ClassLabel, FeatureVector};

use super::{Dataset, Label, LabeledExample, TaskKind};

/// Everything that defines a synthetic stream. Identical specs (including
/// the seed) generate identical datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub dim: usize,
    pub samples: usize,
    /// Class prior probabilities; must be positive and sum to 1.
    pub priors: Vec<f64>,
    /// Per-class mean vectors. Defaults to `2 * e_(i mod dim)` per class.
    #[serde(default)]
    pub means: Option<Vec<Vec<f64>>>,
    /// Standard deviation of the Gaussian noise added to the class mean.
    pub noise: f64,
    /// Probability of replacing the label with a uniformly random other
    /// class; must stay below 0.5.
    pub flip: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::config("need at least two classes"));
        }
        if self.dim == 0 {
            return Err(Error::config("feature dimension must be at least 1"));
        }
        if self.samples == 0 {
            return Err(Error::config("sample count must be at least 1"));
        }
        if self.priors.len() != self.classes {
            return Err(Error::config(format!(
                "expected {} priors, got {}",
                self.classes,
                self.priors.len()
            )));
        }
        if self.priors.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::config("priors must be positive"));
        }
        let total: f64 = self.priors.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("priors sum to {total}, not 1")));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::config("noise scale must be non-negative"));
        }
        if !(0.0..0.5).contains(&self.flip) {
            return Err(Error::config("flip probability must lie in [0, 0.5)"));
        }
        if let Some(means) = &self.means {
            if means.len() != self.classes || means.iter().any(|m| m.len() != self.dim) {
                return Err(Error::config(format!(
                    "means must be {} vectors of dimension {}",
                    self.classes, self.dim
                )));
            }
            if means.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::config("means must be finite"));
            }
        }
        Ok(())
    }

    fn mean(&self, class: usize) -> Vec<f64> {
        match &self.means {
            Some(means) => means[class].clone(),
            None => {
                let mut m = vec![0.0; self.dim];
                m[class % self.dim] = 2.0;
                m
            }
        }
    }
}

/// Draws a dataset from the spec: class by priors, features as the class
/// mean plus scaled Gaussian noise, then an optional label flip. Two-class
/// specs produce signed binary labels with class 1 as the positive class.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let means: Vec<Vec<f64>> = (0..spec.classes).map(|c| spec.mean(c)).collect();
    let task = if spec.classes == 2 {
        TaskKind::Binary
    } else {
        TaskKind::Multiclass {
            classes: spec.classes,
        }
    };

    let mut examples = Vec::with_capacity(spec.samples);
    for _ in 0..spec.samples {
        let mut class = spec.classes - 1;
        let mut acc = 0.0;
        let draw: f64 = rng.gen();
        for (c, &p) in spec.priors.iter().enumerate() {
            acc += p;
            if draw < acc {
                class = c;
                break;
            }
        }
        let values: Vec<f64> = means[class]
            .iter()
            .map(|&m| {
                let n: f64 = rng.sample(StandardNormal);
                m + spec.noise * n
            })
            .collect();
        let flip_draw: f64 = rng.gen();
        let label_class = if flip_draw < spec.flip {
            let other = rng.gen_range(0..spec.classes - 1);
            if other >= class {
                other + 1
            } else {
                other
            }
        } else {
            class
        };
        let label = match task {
            TaskKind::Binary => Label::Binary(if label_class == 0 {
                BinaryLabel::Positive
            } else {
                BinaryLabel::Negative
            }),
            TaskKind::Multiclass { .. } => Label::Class(ClassLabel::from_index(label_class)),
        };
        examples.push(LabeledExample {
            features: FeatureVector::dense(values)?,
            label,
        });
    }

    let source = format!(
        "synthetic(classes={}, dim={}, samples={}, seed={})",
        spec.classes, spec.dim, spec.samples, spec.seed
    );
    Dataset::new(task, spec.dim, source, examples)
}
