//! Prequential evaluation, imbalance-aware metrics, seeded multi-trial
//! protocol and grid search.
//!
//! Every sample is predicted before it trains the model, so all counts
//! describe out-of-sample behavior. Sensitivity and specificity over an
//! empty class are reported as undefined (`None`) and excluded from
//! aggregation instead of being coerced to 0 or 1, which would bias early
//! snapshots.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::binary::{checksum_u64s, BinaryLearner};
use crate::data::{Dataset, LabeledExample};
use crate::error::{Error, Result};
use crate::multiclass::MulticlassLearner;
use crate::types::{BinaryLabel, ClassLabel, FeatureVector};

/// A truth-by-prediction count matrix; binary tasks use the 2x2 case with
/// the positive class at index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts {
    classes: usize,
    counts: Vec<u64>,
    total: u64,
}

impl ConfusionCounts {
    pub fn new(classes: usize) -> Result<Self> {
        if classes < 2 {
            return Err(Error::config("need at least two classes"));
        }
        Ok(ConfusionCounts {
            classes,
            counts: vec![0; classes * classes],
            total: 0,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Records one prediction. Indices must be below the class count.
    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth * self.classes + predicted] += 1;
        self.total += 1;
    }

    pub fn count(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    /// Correctly classified samples (the diagonal).
    pub fn correct(&self) -> u64 {
        (0..self.classes).map(|i| self.count(i, i)).sum()
    }

    /// Mistakes over rounds; 0 before any round.
    pub fn error_rate(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        (self.total - self.correct()) as f64 / self.total as f64
    }

    /// Collapses the matrix to binary counts for one class against the
    /// rest.
    pub fn one_vs_rest(&self, class: usize) -> Result<BinaryCounts> {
        if class >= self.classes {
            return Err(Error::config(format!(
                "class index {class} out of range for {} classes",
                self.classes
            )));
        }
        let mut c = BinaryCounts::default();
        for truth in 0..self.classes {
            for predicted in 0..self.classes {
                let n = self.count(truth, predicted);
                match (truth == class, predicted == class) {
                    (true, true) => c.true_positive += n,
                    (true, false) => c.false_negative += n,
                    (false, true) => c.false_positive += n,
                    (false, false) => c.true_negative += n,
                }
            }
        }
        Ok(c)
    }
}

/// Binary confusion counters for one positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BinaryCounts {
    pub true_positive: u64,
    pub false_negative: u64,
    pub false_positive: u64,
    pub true_negative: u64,
}

impl BinaryCounts {
    /// Recall on the positive class; undefined when no positives were seen.
    pub fn sensitivity(&self) -> Option<f64> {
        let p = self.true_positive + self.false_negative;
        (p > 0).then(|| self.true_positive as f64 / p as f64)
    }

    /// Recall on the negative class; undefined when no negatives were seen.
    pub fn specificity(&self) -> Option<f64> {
        let n = self.true_negative + self.false_positive;
        (n > 0).then(|| self.true_negative as f64 / n as f64)
    }
}

/// `eta_p * sensitivity + eta_n * specificity`; the weights must be a
/// convex combination. Equal weights give balanced accuracy.
pub fn weighted_sum(sensitivity: f64, specificity: f64, eta_p: f64, eta_n: f64) -> Result<f64> {
    check_weights(eta_p, eta_n)?;
    Ok(eta_p * sensitivity + eta_n * specificity)
}

fn check_weights(eta_p: f64, eta_n: f64) -> Result<()> {
    let in_range = (0.0..=1.0).contains(&eta_p) && (0.0..=1.0).contains(&eta_n);
    if !in_range || (eta_p + eta_n - 1.0).abs() > 1e-9 {
        return Err(Error::config(format!(
            "metric weights must be non-negative and sum to 1, got ({eta_p}, {eta_n})"
        )));
    }
    Ok(())
}

/// Validated sensitivity/specificity weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalWeights {
    pub eta_p: f64,
    pub eta_n: f64,
}

impl EvalWeights {
    pub fn new(eta_p: f64, eta_n: f64) -> Result<Self> {
        check_weights(eta_p, eta_n)?;
        Ok(EvalWeights { eta_p, eta_n })
    }

    /// `eta_p` with the complement on the negative side.
    pub fn from_positive(eta_p: f64) -> Result<Self> {
        EvalWeights::new(eta_p, 1.0 - eta_p)
    }

    pub fn balanced() -> Self {
        EvalWeights {
            eta_p: 0.5,
            eta_n: 0.5,
        }
    }

    fn combine(&self, sensitivity: Option<f64>, specificity: Option<f64>) -> Option<f64> {
        match (sensitivity, specificity) {
            (Some(sens), Some(spec)) => Some(self.eta_p * sens + self.eta_n * spec),
            _ => None,
        }
    }
}

/// One-vs-rest metrics of a single class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSnapshot {
    /// One-based class id.
    pub class: usize,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub weighted: Option<f64>,
}

/// Cumulative metrics after a given round. `None` marks metrics whose
/// denominator class has not appeared yet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSnapshot {
    pub round: u64,
    pub error_rate: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub weighted: Option<f64>,
    pub cumulative_loss: f64,
    /// Per-class one-vs-rest metrics; populated for multiclass tasks. The
    /// top-level sensitivity/specificity are then macro-averages over the
    /// classes for which they are defined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_class: Option<Vec<ClassSnapshot>>,
}

impl MetricSnapshot {
    fn from_counts(
        counts: &ConfusionCounts,
        round: u64,
        cumulative_loss: f64,
        weights: &EvalWeights,
    ) -> Result<Self> {
        if counts.classes() == 2 {
            let ovr = counts.one_vs_rest(0)?;
            let sensitivity = ovr.sensitivity();
            let specificity = ovr.specificity();
            return Ok(MetricSnapshot {
                round,
                error_rate: counts.error_rate(),
                sensitivity,
                specificity,
                weighted: weights.combine(sensitivity, specificity),
                cumulative_loss,
                per_class: None,
            });
        }
        let per_class = (0..counts.classes())
            .map(|c| {
                let ovr = counts.one_vs_rest(c)?;
                let sensitivity = ovr.sensitivity();
                let specificity = ovr.specificity();
                Ok(ClassSnapshot {
                    class: c + 1,
                    sensitivity,
                    specificity,
                    weighted: weights.combine(sensitivity, specificity),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let sensitivity = mean_defined(per_class.iter().map(|c| c.sensitivity));
        let specificity = mean_defined(per_class.iter().map(|c| c.specificity));
        Ok(MetricSnapshot {
            round,
            error_rate: counts.error_rate(),
            sensitivity,
            specificity,
            weighted: weights.combine(sensitivity, specificity),
            cumulative_loss,
            per_class: Some(per_class),
        })
    }
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

/// What one prequential round produced, in confusion-index terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    pub predicted: usize,
    pub loss: f64,
    pub updated: bool,
}

/// A learner that can run the test-then-train loop. Classes are addressed
/// by confusion index: binary learners put the positive class at 0.
pub trait OnlineClassifier {
    fn num_classes(&self) -> usize;
    fn dim(&self) -> usize;
    /// Predict on `x`, then learn from the revealed truth.
    fn process(&mut self, x: &FeatureVector, truth: usize) -> Result<RoundOutcome>;
    fn state_digest(&self) -> u64;
}

impl OnlineClassifier for BinaryLearner {
    fn num_classes(&self) -> usize {
        2
    }

    fn dim(&self) -> usize {
        self.weights().len()
    }

    fn process(&mut self, x: &FeatureVector, truth: usize) -> Result<RoundOutcome> {
        let label = match truth {
            0 => BinaryLabel::Positive,
            1 => BinaryLabel::Negative,
            other => {
                return Err(Error::LabelSpace {
                    round: 0,
                    found: format!("class index {other}"),
                })
            }
        };
        let outcome = self.step(x, label)?;
        Ok(RoundOutcome {
            predicted: if outcome.predicted == BinaryLabel::Positive {
                0
            } else {
                1
            },
            loss: outcome.loss,
            updated: outcome.updated,
        })
    }

    fn state_digest(&self) -> u64 {
        BinaryLearner::state_digest(self)
    }
}

impl OnlineClassifier for MulticlassLearner {
    fn num_classes(&self) -> usize {
        self.classes()
    }

    fn dim(&self) -> usize {
        MulticlassLearner::dim(self)
    }

    fn process(&mut self, x: &FeatureVector, truth: usize) -> Result<RoundOutcome> {
        let outcome = self.step(x, ClassLabel::from_index(truth))?;
        Ok(RoundOutcome {
            predicted: outcome.predicted.index(),
            loss: outcome.loss,
            updated: outcome.updated,
        })
    }

    fn state_digest(&self) -> u64 {
        MulticlassLearner::state_digest(self)
    }
}

/// Everything one prequential pass produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub final_snapshot: MetricSnapshot,
    /// Snapshots at every stride multiple, then the final round again as
    /// the unconditional last entry.
    pub curve: Vec<MetricSnapshot>,
    pub counts: ConfusionCounts,
    /// Time spent inside the learner (predict + update), excluding metric
    /// bookkeeping and IO.
    pub learner_seconds: f64,
}

/// Runs the test-then-train loop over the stream in order. Metrics count
/// pre-update predictions only.
pub fn prequential_run<'a, C: OnlineClassifier>(
    classifier: &mut C,
    stream: impl IntoIterator<Item = &'a LabeledExample>,
    stride: usize,
    weights: &EvalWeights,
) -> Result<RunRecord> {
    if stride == 0 {
        return Err(Error::config("curve stride must be at least 1"));
    }
    let mut counts = ConfusionCounts::new(classifier.num_classes())?;
    let mut curve = Vec::new();
    let mut cumulative_loss = 0.0;
    let mut learner_seconds = 0.0;
    let mut round: u64 = 0;
    for example in stream {
        round += 1;
        let truth = example.label.confusion_index();
        let started = Instant::now();
        let outcome = classifier
            .process(&example.features, truth)
            .map_err(|e| Error::Stream {
                round: round as usize,
                source: Box::new(e),
            })?;
        learner_seconds += started.elapsed().as_secs_f64();
        counts.record(truth, outcome.predicted);
        cumulative_loss += outcome.loss;
        if round % stride as u64 == 0 {
            curve.push(MetricSnapshot::from_counts(
                &counts,
                round,
                cumulative_loss,
                weights,
            )?);
        }
    }
    if round == 0 {
        return Err(Error::EmptyDataset);
    }
    let final_snapshot = MetricSnapshot::from_counts(&counts, round, cumulative_loss, weights)?;
    curve.push(final_snapshot.clone());
    Ok(RunRecord {
        final_snapshot,
        curve,
        counts,
        learner_seconds,
    })
}

/// Protocol knobs for a multi-trial experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialConfig {
    pub trials: usize,
    pub master_seed: u64,
    pub stride: usize,
    pub weights: EvalWeights,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            trials: 10,
            master_seed: 0,
            stride: 100,
            weights: EvalWeights::balanced(),
        }
    }
}

/// Mean and population standard deviation of one metric over trials;
/// `None` when the metric was undefined in every trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl Aggregate {
    fn over(values: impl Iterator<Item = Option<f64>>) -> Self {
        let defined: Vec<f64> = values.flatten().collect();
        if defined.is_empty() {
            return Aggregate {
                mean: None,
                std: None,
            };
        }
        let n = defined.len() as f64;
        let mean = defined.iter().sum::<f64>() / n;
        let var = defined.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Aggregate {
            mean: Some(mean),
            std: Some(var.sqrt()),
        }
    }
}

/// Per-metric aggregates over the trial finals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricAggregate {
    pub error_rate: Aggregate,
    pub sensitivity: Aggregate,
    pub specificity: Aggregate,
    pub weighted: Aggregate,
    pub cumulative_loss: Aggregate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_class: Option<Vec<ClassAggregate>>,
}

/// Aggregates of one class's one-vs-rest metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassAggregate {
    pub class: usize,
    pub sensitivity: Aggregate,
    pub specificity: Aggregate,
    pub weighted: Aggregate,
}

/// Results of a seeded multi-trial experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub trials: usize,
    pub master_seed: u64,
    /// Final snapshot of each trial, in trial order.
    pub finals: Vec<MetricSnapshot>,
    pub aggregate: MetricAggregate,
    /// Learning curve averaged across trials at each snapshot position.
    pub curve: Vec<MetricSnapshot>,
    /// Checksum of each trial's shuffled sample order; equal checksums
    /// guarantee two experiments consumed identical streams.
    pub stream_checksums: Vec<u64>,
    pub learner_seconds: f64,
    pub wall_seconds: f64,
}

/// Runs `trials` prequential passes, each on a fresh learner and a fresh
/// shuffle seeded with `master_seed + trial`, and aggregates the finals.
pub fn trial_suite<C: OnlineClassifier>(
    dataset: &Dataset,
    config: &TrialConfig,
    mut make: impl FnMut() -> Result<C>,
) -> Result<TrialReport> {
    if config.trials == 0 {
        return Err(Error::config("need at least one trial"));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let started = Instant::now();
    let mut finals = Vec::with_capacity(config.trials);
    let mut curves: Vec<Vec<MetricSnapshot>> = Vec::with_capacity(config.trials);
    let mut stream_checksums = Vec::with_capacity(config.trials);
    let mut learner_seconds = 0.0;
    for trial in 0..config.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed.wrapping_add(trial as u64));
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        order.shuffle(&mut rng);
        stream_checksums.push(checksum_u64s(order.iter().map(|&i| i as u64)));
        let mut learner = make()?;
        let record = prequential_run(
            &mut learner,
            order.iter().map(|&i| &dataset.examples()[i]),
            config.stride,
            &config.weights,
        )?;
        finals.push(record.final_snapshot);
        curves.push(record.curve);
        learner_seconds += record.learner_seconds;
    }
    let aggregate = aggregate_finals(&finals);
    let curve = mean_curve(&curves);
    Ok(TrialReport {
        trials: config.trials,
        master_seed: config.master_seed,
        finals,
        aggregate,
        curve,
        stream_checksums,
        learner_seconds,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

fn aggregate_finals(finals: &[MetricSnapshot]) -> MetricAggregate {
    let per_class = finals[0].per_class.as_ref().map(|first| {
        (0..first.len())
            .map(|c| ClassAggregate {
                class: c + 1,
                sensitivity: Aggregate::over(
                    finals
                        .iter()
                        .map(|f| f.per_class.as_ref().and_then(|pc| pc[c].sensitivity)),
                ),
                specificity: Aggregate::over(
                    finals
                        .iter()
                        .map(|f| f.per_class.as_ref().and_then(|pc| pc[c].specificity)),
                ),
                weighted: Aggregate::over(
                    finals
                        .iter()
                        .map(|f| f.per_class.as_ref().and_then(|pc| pc[c].weighted)),
                ),
            })
            .collect()
    });
    MetricAggregate {
        error_rate: Aggregate::over(finals.iter().map(|f| Some(f.error_rate))),
        sensitivity: Aggregate::over(finals.iter().map(|f| f.sensitivity)),
        specificity: Aggregate::over(finals.iter().map(|f| f.specificity)),
        weighted: Aggregate::over(finals.iter().map(|f| f.weighted)),
        cumulative_loss: Aggregate::over(finals.iter().map(|f| Some(f.cumulative_loss))),
        per_class,
    }
}

/// Averages trials position-wise; every trial shares the same snapshot
/// rounds because stride and stream length match. Undefined metrics are
/// excluded per position.
fn mean_curve(curves: &[Vec<MetricSnapshot>]) -> Vec<MetricSnapshot> {
    let positions = curves.iter().map(Vec::len).min().unwrap_or(0);
    (0..positions)
        .map(|i| {
            let at: Vec<&MetricSnapshot> = curves.iter().map(|c| &c[i]).collect();
            let per_class = at[0].per_class.as_ref().map(|first| {
                (0..first.len())
                    .map(|c| {
                        let sensitivity = mean_defined(
                            at.iter()
                                .map(|s| s.per_class.as_ref().and_then(|pc| pc[c].sensitivity)),
                        );
                        let specificity = mean_defined(
                            at.iter()
                                .map(|s| s.per_class.as_ref().and_then(|pc| pc[c].specificity)),
                        );
                        let weighted = mean_defined(
                            at.iter()
                                .map(|s| s.per_class.as_ref().and_then(|pc| pc[c].weighted)),
                        );
                        ClassSnapshot {
                            class: c + 1,
                            sensitivity,
                            specificity,
                            weighted,
                        }
                    })
                    .collect()
            });
            MetricSnapshot {
                round: at[0].round,
                error_rate: at.iter().map(|s| s.error_rate).sum::<f64>() / at.len() as f64,
                sensitivity: mean_defined(at.iter().map(|s| s.sensitivity)),
                specificity: mean_defined(at.iter().map(|s| s.specificity)),
                weighted: mean_defined(at.iter().map(|s| s.weighted)),
                cumulative_loss: at.iter().map(|s| s.cumulative_loss).sum::<f64>()
                    / at.len() as f64,
                per_class,
            }
        })
        .collect()
}

/// Indices of the tuning prefix: the first `fraction` of a fixed seed-0
/// shuffle, at least one sample. The shuffle is deliberately independent of
/// the experiment's master seed so tuning sees one stable prefix.
pub fn validation_prefix(samples: usize, fraction: f64) -> Result<Vec<usize>> {
    if samples == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::config(format!(
            "validation fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..samples).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    order.shuffle(&mut rng);
    let take = ((samples as f64 * fraction).floor() as usize).max(1);
    order.truncate(take);
    Ok(order)
}

/// What the grid optimizes on the validation prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SelectionCriterion {
    /// Minimize the final error rate.
    ErrorRate,
    /// Maximize the final weighted sum.
    WeightedSum,
}

impl SelectionCriterion {
    /// Cost-sensitive learners tune on the weighted sum, everything else on
    /// the error rate.
    pub fn for_cost_sensitive(cost_sensitive: bool) -> Self {
        if cost_sensitive {
            SelectionCriterion::WeightedSum
        } else {
            SelectionCriterion::ErrorRate
        }
    }
}

/// One evaluated grid value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub value: f64,
    /// Criterion score; `None` when the point failed.
    pub score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Grid results with the winning value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub criterion: SelectionCriterion,
    pub best_value: f64,
    pub best_score: f64,
    pub points: Vec<GridPoint>,
}

/// Evaluates each distinct grid value via `evaluate` (which should run the
/// candidate on the validation prefix and return the final snapshot) and
/// picks the best by `criterion`. Ties go to the smaller value; individual
/// failures are recorded and skipped unless every point fails.
pub fn grid_search(
    grid: &[f64],
    criterion: SelectionCriterion,
    mut evaluate: impl FnMut(f64) -> Result<MetricSnapshot>,
) -> Result<GridReport> {
    if grid.is_empty() {
        return Err(Error::config("grid must contain at least one value"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("grid values must be finite"));
    }
    let mut values = grid.to_vec();
    values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
    values.dedup();

    let mut points = Vec::with_capacity(values.len());
    let mut best: Option<(f64, f64)> = None;
    for value in values {
        let (score, failure) = match evaluate(value) {
            Ok(snapshot) => match criterion {
                SelectionCriterion::ErrorRate => (Some(snapshot.error_rate), None),
                SelectionCriterion::WeightedSum => match snapshot.weighted {
                    Some(w) => (Some(w), None),
                    None => (
                        None,
                        Some("weighted sum undefined on the validation prefix".to_string()),
                    ),
                },
            },
            Err(e) => (None, Some(e.to_string())),
        };
        if let Some(score) = score {
            let improves = match (criterion, best) {
                (_, None) => true,
                (SelectionCriterion::ErrorRate, Some((_, b))) => score < b,
                (SelectionCriterion::WeightedSum, Some((_, b))) => score > b,
            };
            if improves {
                best = Some((value, score));
            }
        }
        points.push(GridPoint {
            value,
            score,
            failure,
        });
    }
    match best {
        Some((best_value, best_score)) => Ok(GridReport {
            criterion,
            best_value,
            best_score,
            points,
        }),
        None => {
            let summary: Vec<String> = points
                .iter()
                .map(|p| {
                    format!(
                        "{}: {}",
                        p.value,
                        p.failure.as_deref().unwrap_or("no score")
                    )
                })
                .collect();
            Err(Error::config(format!(
                "every grid point failed: {}",
                summary.join("; ")
            )))
        }
    }
}
