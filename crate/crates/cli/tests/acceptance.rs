//! The shipping gates, one test each. Every test prints exactly one
//! verdict line; tolerances and budgets are pinned as constants next to
//! the checks that use them.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use brook_core::data::{generate_synthetic, load_sparse, Label, SyntheticSpec};
use brook_core::eval::{prequential_run, trial_suite, EvalWeights, TrialConfig};
use brook_core::model::{Covariance, CovarianceMode};
use brook_core::multiclass::{MulticlassAlgorithm, MulticlassLearner};
use brook_core::types::{BinaryLabel, ClassLabel, CostMatrix, Hyperparams};
use brook_core::{BinaryAlgorithm, BinaryLearner, FeatureVector};

/// Absolute tolerance for values with a closed-form answer.
const EXACT: f64 = 1e-10;

fn verdict(index: u32, tag: &str) {
    println!("acceptance {index:02} {tag}: pass");
}

fn dense(values: Vec<f64>) -> FeatureVector {
    FeatureVector::dense(values).unwrap()
}

#[test]
fn c01_closed_form_updates_match_hand_computed_values() {
    let mut adaptive =
        BinaryLearner::new(BinaryAlgorithm::Arow, 2, Hyperparams::default()).unwrap();
    let x = dense(vec![1.0, 0.0]);
    adaptive.step(&x, BinaryLabel::Positive).unwrap();
    assert!((adaptive.weights()[0] - 0.5).abs() <= EXACT);
    assert!(adaptive.weights()[1].abs() <= EXACT);
    let cov = adaptive.gaussian().unwrap().covariance();
    assert!((cov.diagonal_entry(0) - 0.5).abs() <= EXACT);

    let mut shared = MulticlassLearner::builder(MulticlassAlgorithm::Arcsmc, 2, 2)
        .cost_matrix(CostMatrix::unit(2).unwrap())
        .build()
        .unwrap();
    shared.step(&x, ClassLabel::new(2, 2).unwrap()).unwrap();
    let truth_row = shared.model().row(1);
    let rival_row = shared.model().row(0);
    assert!((truth_row[0] - 0.5).abs() <= EXACT && truth_row[1].abs() <= EXACT);
    assert!((rival_row[0] + 0.5).abs() <= EXACT && rival_row[1].abs() <= EXACT);
    let cov = shared.model().covariance().unwrap();
    assert!((cov.diagonal_entry(0) - 0.5).abs() <= EXACT);

    verdict(1, "closed-form updates");
}

/// Two well-separated blobs along the first axis.
fn blob_binary(rng: &mut ChaCha8Rng, dim: usize) -> (FeatureVector, BinaryLabel) {
    let positive = rng.gen_bool(0.5);
    let center: f64 = if positive { 6.0 } else { -6.0 };
    let values = (0..dim)
        .map(|i| {
            let base = if i == 0 { center } else { 0.0 };
            base + rng.gen_range(-0.3..0.3)
        })
        .collect();
    let label = if positive {
        BinaryLabel::Positive
    } else {
        BinaryLabel::Negative
    };
    (dense(values), label)
}

/// One well-separated blob per class, along that class's axis.
fn blob_multiclass(rng: &mut ChaCha8Rng, classes: usize) -> (FeatureVector, ClassLabel) {
    let class = rng.gen_range(0..classes);
    let values = (0..classes)
        .map(|i| {
            let base = if i == class { 6.0 } else { 0.0 };
            base + rng.gen_range(-0.3..0.3)
        })
        .collect();
    (dense(values), ClassLabel::from_index(class))
}

#[test]
fn c02_zero_loss_rounds_leave_every_learner_bit_identical() {
    const ZERO_LOSS_ROUNDS: u32 = 10_000;
    const STEP_CAP: u32 = 80_000;
    const BUDGET_SECONDS: f64 = 5.0;
    let started = Instant::now();

    for algo in BinaryAlgorithm::ALL {
        let mut learner = BinaryLearner::new(algo, 4, Hyperparams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut seen = 0u32;
        let mut steps = 0u32;
        while seen < ZERO_LOSS_ROUNDS {
            steps += 1;
            assert!(
                steps <= STEP_CAP,
                "{}: only {seen} zero-loss rounds in {STEP_CAP} steps",
                algo.name()
            );
            let (x, y) = blob_binary(&mut rng, 4);
            let before = learner.state_digest();
            let out = learner.step(&x, y).unwrap();
            if out.loss == 0.0 {
                assert_eq!(
                    learner.state_digest(),
                    before,
                    "{} moved on a zero-loss round",
                    algo.name()
                );
                seen += 1;
            }
        }
    }

    for algo in MulticlassAlgorithm::ALL {
        let builder = MulticlassLearner::builder(algo, 3, 3);
        let builder = if algo.is_cost_sensitive() {
            builder.cost_matrix(CostMatrix::unit(3).unwrap())
        } else {
            builder
        };
        let mut learner = builder.build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut seen = 0u32;
        let mut steps = 0u32;
        while seen < ZERO_LOSS_ROUNDS {
            steps += 1;
            assert!(
                steps <= STEP_CAP,
                "{}: only {seen} zero-loss rounds in {STEP_CAP} steps",
                algo.name()
            );
            let (x, y) = blob_multiclass(&mut rng, 3);
            let before = learner.state_digest();
            let out = learner.step(&x, y).unwrap();
            if out.loss == 0.0 {
                assert_eq!(
                    learner.state_digest(),
                    before,
                    "{} moved on a zero-loss round",
                    algo.name()
                );
                seen += 1;
            }
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < BUDGET_SECONDS, "took {elapsed:.2}s");
    verdict(2, "passivity on zero-loss rounds");
}

#[test]
fn c03_margin_restoration_is_exact_and_the_capped_step_respects_its_bound() {
    const TRIGGERS: u32 = 10_000;
    const CAP: f64 = 0.3;
    let mut hard = BinaryLearner::new(BinaryAlgorithm::Pa, 5, Hyperparams::default()).unwrap();
    let mut capped = BinaryLearner::new(
        BinaryAlgorithm::PaI,
        5,
        Hyperparams::default().with_aggressiveness(CAP),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..TRIGGERS {
        let values: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = dense(values);

        // Label against the current score so the margin constraint is
        // always violated and the update always fires.
        let (_, score) = hard.predict(&x).unwrap();
        let y = if score > 0.0 {
            BinaryLabel::Negative
        } else {
            BinaryLabel::Positive
        };
        let out = hard.step(&x, y).unwrap();
        assert!(out.updated);
        let margin = y.sign() * x.dot(hard.weights()).unwrap();
        let hinge = (1.0 - margin).max(0.0);
        assert!(hinge <= EXACT, "post-update hinge {hinge}");

        let before: Vec<f64> = capped.weights().to_vec();
        let yc = if rng.gen_bool(0.5) {
            BinaryLabel::Positive
        } else {
            BinaryLabel::Negative
        };
        capped.step(&x, yc).unwrap();
        let moved: f64 = capped
            .weights()
            .iter()
            .zip(&before)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let bound = CAP * x.squared_norm().sqrt();
        assert!(moved <= bound + EXACT, "moved {moved} > {bound}");
    }
    verdict(3, "margin restoration and step cap");
}

fn assert_psd(cov: &Covariance, dim: usize, tag: &str, round: usize) {
    for i in 0..dim {
        for j in (i + 1)..dim {
            let skew = (cov.entry(i, j) - cov.entry(j, i)).abs();
            assert!(skew <= EXACT, "{tag}: asymmetry {skew} at round {round}");
        }
    }
    let matrix = DMatrix::from_fn(dim, dim, |i, j| cov.entry(i, j));
    let eigen = SymmetricEigen::new(matrix);
    let min = eigen
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    assert!(min >= -EXACT, "{tag}: eigenvalue {min} at round {round}");
}

#[test]
fn c04_full_covariances_stay_symmetric_psd_and_never_widen() {
    const ROUNDS: usize = 1_000;
    const DIM: usize = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(19);

    let mut binary = BinaryLearner::with_covariance(
        BinaryAlgorithm::Arow,
        DIM,
        Hyperparams::default(),
        CovarianceMode::Full,
    )
    .unwrap();
    let mut shared = MulticlassLearner::builder(MulticlassAlgorithm::Arcsmc, 3, DIM)
        .covariance_mode(CovarianceMode::Full)
        .cost_matrix(CostMatrix::unit(3).unwrap())
        .build()
        .unwrap();

    for round in 0..ROUNDS {
        let values: Vec<f64> = (0..DIM).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x = dense(values);

        let before = x.dot(&binary.gaussian().unwrap().covariance().multiply(&x)).unwrap();
        let y = if rng.gen_bool(0.5) {
            BinaryLabel::Positive
        } else {
            BinaryLabel::Negative
        };
        binary.step(&x, y).unwrap();
        let cov = binary.gaussian().unwrap().covariance();
        let after = x.dot(&cov.multiply(&x)).unwrap();
        assert!(after <= before + EXACT, "binary widened at round {round}");
        assert_psd(cov, DIM, "binary", round);

        let before = x.dot(&shared.model().covariance().unwrap().multiply(&x)).unwrap();
        let label = ClassLabel::from_index(rng.gen_range(0..3));
        shared.step(&x, label).unwrap();
        let cov = shared.model().covariance().unwrap();
        let after = x.dot(&cov.multiply(&x)).unwrap();
        assert!(after <= before + EXACT, "shared widened at round {round}");
        assert_psd(cov, DIM, "shared", round);
    }
    verdict(4, "covariance geometry");
}

#[test]
fn c05_degenerate_parameterizations_collapse_onto_their_base_learners() {
    const ROUNDS: usize = 1_000;

    // A unit positive-class target turns the cost-sensitive gradient
    // learner into the plain one.
    let mut plain = BinaryLearner::new(BinaryAlgorithm::Ogd, 5, Hyperparams::default()).unwrap();
    let mut cost_free = BinaryLearner::new(
        BinaryAlgorithm::Csogd,
        5,
        Hyperparams::default().with_imbalance_weight(Some(1.0)),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for round in 0..ROUNDS {
        let values: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x = dense(values);
        let y = if rng.gen_bool(0.4) {
            BinaryLabel::Positive
        } else {
            BinaryLabel::Negative
        };
        let a = plain.step(&x, y).unwrap();
        let b = cost_free.step(&x, y).unwrap();
        assert_eq!(a.predicted, b.predicted, "round {round}");
        assert_eq!(a.loss.to_bits(), b.loss.to_bits(), "round {round}");
        assert_eq!(
            plain.state_digest(),
            cost_free.state_digest(),
            "round {round}"
        );
    }

    // Unit costs turn the cost-sensitive shared-covariance learner into
    // the plain hinge-driven adaptive one.
    let mut base = MulticlassLearner::new(MulticlassAlgorithm::Arow, 3, 4, Hyperparams::default())
        .unwrap();
    let mut unit_cost = MulticlassLearner::builder(MulticlassAlgorithm::Arcsmc, 3, 4)
        .cost_matrix(CostMatrix::unit(3).unwrap())
        .build()
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for round in 0..ROUNDS {
        let values: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x = dense(values);
        let y = ClassLabel::from_index(rng.gen_range(0..3));
        let a = base.step(&x, y).unwrap();
        let b = unit_cost.step(&x, y).unwrap();
        assert_eq!(a.predicted, b.predicted, "round {round}");
        assert_eq!(a.loss.to_bits(), b.loss.to_bits(), "round {round}");
        assert_eq!(
            base.state_digest(),
            unit_cost.state_digest(),
            "round {round}"
        );
    }
    verdict(5, "degeneracy equivalences");
}

#[test]
fn c06_mistakes_on_a_separable_stream_stay_under_the_margin_bound() {
    // Four unit-norm points, separated by the first coordinate with
    // margin 0.2, so the classic bound allows (1 / 0.2)^2 = 25 mistakes.
    const BOUND: u32 = 25;
    let tall = (1.0f64 - 0.04).sqrt();
    let mut learner =
        BinaryLearner::new(BinaryAlgorithm::Perceptron, 2, Hyperparams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let mut mistakes = 0u32;
    for _ in 0..10_000 {
        let first = if rng.gen_bool(0.5) { 0.2 } else { -0.2 };
        let second = if rng.gen_bool(0.5) { tall } else { -tall };
        let x = dense(vec![first, second]);
        let y = if first > 0.0 {
            BinaryLabel::Positive
        } else {
            BinaryLabel::Negative
        };
        let out = learner.step(&x, y).unwrap();
        if out.updated {
            mistakes += 1;
        }
    }
    assert!(mistakes <= BOUND, "{mistakes} mistakes");
    verdict(6, "mistake bound on a separable stream");
}

#[test]
fn c07_the_prequential_loop_matches_a_brute_force_reference_exactly() {
    const STRIDE: usize = 10;
    let spec = SyntheticSpec {
        classes: 2,
        dim: 4,
        samples: 100,
        priors: vec![0.35, 0.65],
        means: None,
        noise: 1.0,
        flip: 0.1,
        seed: 13,
    };
    let dataset = generate_synthetic(&spec).unwrap();
    let weights = EvalWeights::balanced();

    let mut learner = BinaryLearner::new(BinaryAlgorithm::Arow, 4, Hyperparams::default()).unwrap();
    let record = prequential_run(&mut learner, dataset.examples(), STRIDE, &weights).unwrap();

    // Reference loop with its own counters and metric arithmetic,
    // including the convention that a recall is undefined until its
    // class has appeared.
    struct Reference {
        round: u64,
        error_rate: f64,
        sensitivity: Option<f64>,
        specificity: Option<f64>,
        weighted: Option<f64>,
        cumulative_loss: f64,
    }
    let mut reference =
        BinaryLearner::new(BinaryAlgorithm::Arow, 4, Hyperparams::default()).unwrap();
    let (mut tp, mut fn_, mut fp, mut tn) = (0u64, 0u64, 0u64, 0u64);
    let mut loss_sum = 0.0;
    let mut snapshots: Vec<Reference> = Vec::new();
    for (i, example) in dataset.examples().iter().enumerate() {
        let truth = match example.label {
            Label::Binary(b) => b,
            Label::Class(_) => unreachable!(),
        };
        let (predicted, _) = reference.predict(&example.features).unwrap();
        match (truth, predicted) {
            (BinaryLabel::Positive, BinaryLabel::Positive) => tp += 1,
            (BinaryLabel::Positive, BinaryLabel::Negative) => fn_ += 1,
            (BinaryLabel::Negative, BinaryLabel::Positive) => fp += 1,
            (BinaryLabel::Negative, BinaryLabel::Negative) => tn += 1,
        }
        let out = reference.step(&example.features, truth).unwrap();
        assert_eq!(out.predicted, predicted);
        loss_sum += out.loss;
        let round = (i + 1) as u64;
        if (i + 1) % STRIDE == 0 || i + 1 == dataset.len() {
            let p = tp + fn_;
            let n = tn + fp;
            let sens = (p > 0).then(|| tp as f64 / p as f64);
            let spec = (n > 0).then(|| tn as f64 / n as f64);
            let weighted = match (sens, spec) {
                (Some(s), Some(c)) => Some(0.5 * s + 0.5 * c),
                _ => None,
            };
            snapshots.push(Reference {
                round,
                error_rate: (fn_ + fp) as f64 / round as f64,
                sensitivity: sens,
                specificity: spec,
                weighted,
                cumulative_loss: loss_sum,
            });
        }
    }

    assert_eq!(record.counts.count(0, 0), tp);
    assert_eq!(record.counts.count(0, 1), fn_);
    assert_eq!(record.counts.count(1, 0), fp);
    assert_eq!(record.counts.count(1, 1), tn);

    // 100 samples at stride 10: ten interior snapshots plus the repeated
    // final one.
    assert_eq!(record.curve.len(), snapshots.len() + 1);
    for (snap, expected) in record.curve.iter().zip(&snapshots) {
        assert_eq!(snap.round, expected.round);
        assert_eq!(snap.error_rate, expected.error_rate);
        assert_eq!(snap.sensitivity, expected.sensitivity);
        assert_eq!(snap.specificity, expected.specificity);
        assert_eq!(snap.weighted, expected.weighted);
        assert_eq!(snap.cumulative_loss, expected.cumulative_loss);
    }
    assert_eq!(record.curve.last(), Some(&record.final_snapshot));
    verdict(7, "reference-loop equivalence");
}

#[test]
fn c08_cost_awareness_lifts_the_minority_class_in_paired_trials() {
    const BUDGET_SECONDS: f64 = 30.0;
    const NEEDED_WINS: usize = 8;
    let started = Instant::now();
    let spec = SyntheticSpec {
        classes: 3,
        dim: 8,
        samples: 900,
        priors: vec![0.71, 0.23, 0.06],
        means: None,
        noise: 1.2,
        flip: 0.02,
        seed: 11,
    };
    let dataset = generate_synthetic(&spec).unwrap();
    let cost = brook_core::data::cost_matrix_from_counts(&dataset.meta().class_counts).unwrap();
    let trial = TrialConfig {
        trials: 10,
        master_seed: 3,
        stride: dataset.len(),
        weights: EvalWeights::balanced(),
    };

    let base = trial_suite(&dataset, &trial, || {
        MulticlassLearner::new(MulticlassAlgorithm::Arow, 3, 8, Hyperparams::default())
    })
    .unwrap();
    let cost_aware = trial_suite(&dataset, &trial, || {
        MulticlassLearner::builder(MulticlassAlgorithm::Arcsmc, 3, 8)
            .cost_matrix(cost.clone())
            .build()
    })
    .unwrap();
    assert_eq!(base.stream_checksums, cost_aware.stream_checksums);

    let minority = |finals: &[brook_core::eval::MetricSnapshot]| -> Vec<f64> {
        finals
            .iter()
            .map(|f| f.per_class.as_ref().unwrap()[2].weighted.unwrap())
            .collect()
    };
    let base_sums = minority(&base.finals);
    let cost_sums = minority(&cost_aware.finals);
    let wins = base_sums
        .iter()
        .zip(&cost_sums)
        .filter(|(b, c)| c > b)
        .count();
    assert!(
        wins >= NEEDED_WINS,
        "cost-aware learner won only {wins}/10 (base {base_sums:?}, cost-aware {cost_sums:?})"
    );
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < BUDGET_SECONDS, "took {elapsed:.2}s");
    verdict(8, "minority-class lift from costs");
}

#[test]
fn c09_the_cost_sensitive_gradient_learner_wins_on_imbalanced_binary_streams() {
    const NEEDED_WINS: usize = 8;
    let spec = SyntheticSpec {
        classes: 2,
        dim: 6,
        samples: 400,
        priors: vec![0.2, 0.8],
        means: None,
        noise: 1.0,
        flip: 0.05,
        seed: 9,
    };
    let dataset = generate_synthetic(&spec).unwrap();
    let trial = TrialConfig {
        trials: 10,
        master_seed: 7,
        stride: dataset.len(),
        weights: EvalWeights::balanced(),
    };

    let plain = trial_suite(&dataset, &trial, || {
        BinaryLearner::new(BinaryAlgorithm::Ogd, 6, Hyperparams::default())
    })
    .unwrap();
    let cost_aware = trial_suite(&dataset, &trial, || {
        BinaryLearner::new(BinaryAlgorithm::Csogd, 6, Hyperparams::default())
    })
    .unwrap();
    assert_eq!(plain.stream_checksums, cost_aware.stream_checksums);

    let sums = |finals: &[brook_core::eval::MetricSnapshot]| -> Vec<f64> {
        finals.iter().map(|f| f.weighted.unwrap()).collect()
    };
    let plain_sums = sums(&plain.finals);
    let cost_sums = sums(&cost_aware.finals);
    let wins = plain_sums
        .iter()
        .zip(&cost_sums)
        .filter(|(p, c)| c > p)
        .count();
    assert!(
        wins >= NEEDED_WINS,
        "cost-sensitive learner won only {wins}/10 (plain {plain_sums:?}, cost-aware {cost_sums:?})"
    );
    verdict(9, "weighted-sum advantage under imbalance");
}

#[test]
fn c10_throughput_holds_at_testbed_scale() {
    const FIRST_ORDER_BUDGET: f64 = 5.0;
    const SHARED_COVARIANCE_BUDGET: f64 = 10.0;

    // Dense binary stream at gas-pipeline scale; generation is excluded
    // from the timed section.
    let spec = SyntheticSpec {
        classes: 2,
        dim: 17,
        samples: 274_628,
        priors: vec![0.3, 0.7],
        means: None,
        noise: 1.0,
        flip: 0.1,
        seed: 5,
    };
    let dataset = generate_synthetic(&spec).unwrap();
    let mut learner = BinaryLearner::new(BinaryAlgorithm::PaI, 17, Hyperparams::default()).unwrap();
    let started = Instant::now();
    let record =
        prequential_run(&mut learner, dataset.examples(), dataset.len(), &EvalWeights::balanced())
            .unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    assert_eq!(record.final_snapshot.round, 274_628);
    assert!(
        elapsed <= FIRST_ORDER_BUDGET,
        "first-order pass took {elapsed:.2}s"
    );

    // Wide three-class stream with a diagonal shared covariance.
    let spec = SyntheticSpec {
        classes: 3,
        dim: 128,
        samples: 78_377,
        priors: vec![0.71, 0.23, 0.06],
        means: None,
        noise: 1.0,
        flip: 0.05,
        seed: 6,
    };
    let dataset = generate_synthetic(&spec).unwrap();
    let cost = brook_core::data::cost_matrix_from_counts(&dataset.meta().class_counts).unwrap();
    let mut learner = MulticlassLearner::builder(MulticlassAlgorithm::Arcsmc, 3, 128)
        .cost_matrix(cost)
        .build()
        .unwrap();
    let started = Instant::now();
    let record =
        prequential_run(&mut learner, dataset.examples(), dataset.len(), &EvalWeights::balanced())
            .unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    assert_eq!(record.final_snapshot.round, 78_377);
    assert!(
        elapsed <= SHARED_COVARIANCE_BUDGET,
        "shared-covariance pass took {elapsed:.2}s"
    );
    verdict(10, "throughput at testbed scale");
}

#[test]
fn c11_identical_configs_reproduce_the_summary_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        classes: 2,
        dim: 5,
        samples: 250,
        priors: vec![0.3, 0.7],
        means: None,
        noise: 1.0,
        flip: 0.05,
        seed: 23,
    };
    let spec_path = dir.path().join("spec.json");
    std::fs::write(&spec_path, serde_json::to_string(&spec).unwrap()).unwrap();
    for out in ["first", "second"] {
        let output = std::process::Command::new(env!("CARGO_BIN_EXE_brook"))
            .args(["run", "--algo", "scw", "--synth"])
            .arg(&spec_path)
            .args(["--seed", "41", "--out-dir"])
            .arg(dir.path().join(out))
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "run failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    let first = std::fs::read(dir.path().join("first").join("summary.json")).unwrap();
    let second = std::fs::read(dir.path().join("second").join("summary.json")).unwrap();
    assert!(!first.is_empty());
    assert_eq!(first, second);
    verdict(11, "byte-identical reruns");
}

#[test]
fn c12_testbed_error_rates_when_data_is_present() {
    // Opt-in: point BROOK_TESTBED at a sparse-format binary dataset from
    // the published testbeds.
    let Ok(path) = std::env::var("BROOK_TESTBED") else {
        println!("acceptance 12 testbed reproduction: skip (BROOK_TESTBED not set)");
        return;
    };
    let dataset = load_sparse(&path, None).unwrap();
    let dim = dataset.meta().dim;
    let trial = TrialConfig {
        trials: 10,
        master_seed: 0,
        stride: dataset.len(),
        weights: EvalWeights::balanced(),
    };
    for algo in BinaryAlgorithm::ALL {
        if algo.is_cost_sensitive() {
            continue;
        }
        let report = trial_suite(&dataset, &trial, || {
            BinaryLearner::new(algo, dim, Hyperparams::default())
        })
        .unwrap();
        let error = report.aggregate.error_rate.mean.unwrap();
        assert!(
            (0.20..=0.40).contains(&error),
            "{}: error rate {error:.4} outside 30% +- 10pp",
            algo.name()
        );
    }
    verdict(12, "testbed reproduction");
}
