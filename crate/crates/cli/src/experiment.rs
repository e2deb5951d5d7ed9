//! Turns parsed flags into datasets, learners, and trial reports.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;

use brook_core::data::{
    cost_matrix_from_counts, generate_synthetic, load_csv, load_sparse, write_sparse, CsvSchema,
    Dataset, LabelMode, SyntheticSpec, TaskKind,
};
use brook_core::eval::{
    grid_search, prequential_run, trial_suite, EvalWeights, GridReport, SelectionCriterion,
    TrialConfig, TrialReport,
};
use brook_core::model::CovarianceMode;
use brook_core::multiclass::MulticlassAlgorithm;
use brook_core::types::Hyperparams;
use brook_core::{BinaryAlgorithm, BinaryLearner, CostMatrix, MulticlassLearner};

use crate::args::{
    BenchArgs, CostArg, CovArg, DataArgs, Format, GenArgs, LearnerArgs, ProtocolArgs, RunArgs,
    TaskArg, TuneArgs,
};
use crate::report;

/// Master-seed override, read when --seed is absent.
pub const SEED_ENV: &str = "BROOK_SEED";

/// An algorithm in either label space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoTag {
    Binary(BinaryAlgorithm),
    Multiclass(MulticlassAlgorithm),
}

impl AlgoTag {
    fn parse(task: TaskKind, name: &str) -> Result<Self> {
        match task {
            TaskKind::Binary => Ok(AlgoTag::Binary(BinaryAlgorithm::parse(name)?)),
            TaskKind::Multiclass { .. } => {
                Ok(AlgoTag::Multiclass(MulticlassAlgorithm::parse(name)?))
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AlgoTag::Binary(a) => a.name(),
            AlgoTag::Multiclass(a) => a.name(),
        }
    }

    pub fn is_cost_sensitive(self) -> bool {
        match self {
            AlgoTag::Binary(a) => a.is_cost_sensitive(),
            AlgoTag::Multiclass(a) => a.is_cost_sensitive(),
        }
    }

    pub fn tunable(self) -> bool {
        match self {
            AlgoTag::Binary(a) => a.tunable(),
            AlgoTag::Multiclass(a) => a.tunable(),
        }
    }

    fn apply_grid_value(self, base: &Hyperparams, value: f64) -> brook_core::Result<Hyperparams> {
        match self {
            AlgoTag::Binary(a) => a.apply_grid_value(base, value),
            AlgoTag::Multiclass(a) => a.apply_grid_value(base, value),
        }
    }
}

/// Everything needed to build one fresh learner per trial.
#[derive(Debug, Clone)]
pub struct LearnerSetup {
    pub tag: AlgoTag,
    pub classes: usize,
    pub dim: usize,
    pub params: Hyperparams,
    pub covariance: CovarianceMode,
    /// Resolved matrix; present exactly for cost-sensitive multiclass
    /// learners.
    pub cost: Option<CostMatrix>,
}

impl LearnerSetup {
    fn binary(&self, algo: BinaryAlgorithm, params: &Hyperparams) -> brook_core::Result<BinaryLearner> {
        BinaryLearner::with_covariance(algo, self.dim, params.clone(), self.covariance)
    }

    fn multiclass(
        &self,
        algo: MulticlassAlgorithm,
        params: &Hyperparams,
    ) -> brook_core::Result<MulticlassLearner> {
        let mut builder = MulticlassLearner::builder(algo, self.classes, self.dim)
            .hyperparams(params.clone())
            .covariance_mode(self.covariance);
        if let Some(cost) = &self.cost {
            builder = builder.cost_matrix(cost.clone());
        }
        builder.build()
    }
}

/// The fully resolved experiment, embedded verbatim in every artifact so a
/// run explains itself.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub command: &'static str,
    pub algorithms: Vec<String>,
    pub task: String,
    pub classes: usize,
    pub dim: usize,
    pub samples: usize,
    pub source: String,
    pub class_counts: Vec<u64>,
    pub trials: usize,
    pub master_seed: u64,
    pub stride: usize,
    pub eta_p: f64,
    pub eta_n: f64,
    pub covariance: String,
    pub cost_model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_rows: Option<Vec<Vec<f64>>>,
    pub hyperparams: Hyperparams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation_fraction: Option<f64>,
}

/// A resolved experiment: data, learner recipes, and protocol.
pub struct Experiment {
    pub dataset: Dataset,
    pub learners: Vec<LearnerSetup>,
    pub trial: TrialConfig,
    pub config: ResolvedConfig,
    pub out_dir: PathBuf,
}

pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got '{text}'")),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(e).with_context(|| format!("reading {SEED_ENV}")),
    }
}

fn parse_class_map(pairs: &[String]) -> Result<Vec<(String, usize)>> {
    pairs
        .iter()
        .map(|pair| {
            let (token, id) = pair
                .split_once('=')
                .with_context(|| format!("--class-map entry '{pair}' is not token=id"))?;
            let id: usize = id
                .parse()
                .with_context(|| format!("--class-map id in '{pair}' is not an integer"))?;
            Ok((token.to_string(), id))
        })
        .collect()
}

pub fn load_dataset(args: &DataArgs) -> Result<Dataset> {
    let dataset = match (&args.data, &args.synth) {
        (Some(path), None) => match args.format {
            Format::Csv => {
                let mode = match args.task {
                    TaskArg::Binary => {
                        ensure!(
                            !args.positive.is_empty(),
                            "binary CSV data needs --positive with the positive label tokens"
                        );
                        LabelMode::Binary {
                            positive: args.positive.clone(),
                        }
                    }
                    TaskArg::Multiclass => {
                        ensure!(
                            !args.class_map.is_empty(),
                            "multiclass CSV data needs --class-map with token=id pairs"
                        );
                        LabelMode::Multiclass {
                            classes: parse_class_map(&args.class_map)?,
                        }
                    }
                };
                let schema = CsvSchema {
                    label_column: args.label_col.clone(),
                    mode,
                };
                load_csv(path, &schema)?
            }
            Format::Sparse => load_sparse(path, args.dim)?,
        },
        (None, Some(path)) => {
            let spec = read_synth_spec(path)?;
            generate_synthetic(&spec)?
        }
        (None, None) => bail!("no stream source; pass --data FILE or --synth SPEC"),
        (Some(_), Some(_)) => unreachable!("clap rejects --data with --synth"),
    };
    let matches = matches!(
        (args.task, dataset.meta().task),
        (TaskArg::Binary, TaskKind::Binary) | (TaskArg::Multiclass, TaskKind::Multiclass { .. })
    );
    ensure!(
        matches,
        "--task {} does not match the {} labels in '{}'",
        match args.task {
            TaskArg::Binary => "binary",
            TaskArg::Multiclass => "multiclass",
        },
        match dataset.meta().task {
            TaskKind::Binary => "binary".to_string(),
            TaskKind::Multiclass { classes } => format!("{classes}-class"),
        },
        dataset.meta().source,
    );
    Ok(dataset)
}

fn read_synth_spec(path: &PathBuf) -> Result<SyntheticSpec> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading stream spec {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing stream spec {}", path.display()))
}

fn read_cost_rows(path: &PathBuf) -> Result<Vec<Vec<f64>>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading cost file {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing cost file {} (expected a JSON array of rows)", path.display()))
}

fn base_params(args: &LearnerArgs) -> Hyperparams {
    let mut p = Hyperparams::default();
    if let Some(v) = args.aggressiveness {
        p = p.with_aggressiveness(v);
    }
    if let Some(v) = args.regularizer {
        p = p.with_regularizer(v);
    }
    if let Some(v) = args.learning_rate {
        p = p.with_learning_rate(v);
    }
    if let Some(v) = args.imbalance_weight {
        p = p.with_imbalance_weight(Some(v));
    }
    if let Some(v) = args.confidence {
        p = p.with_confidence(v);
    }
    if let Some(v) = args.margin_slack {
        p = p.with_margin_slack(v);
    }
    p
}

fn cost_model_label(args: &LearnerArgs) -> String {
    match args.cost {
        CostArg::Unit => "unit".to_string(),
        CostArg::InverseCount => "inverse-count".to_string(),
        CostArg::File => match &args.cost_file {
            Some(path) => format!("file:{}", path.display()),
            None => "file".to_string(),
        },
    }
}

fn file_cost_matrix(args: &LearnerArgs) -> Result<CostMatrix> {
    let path = args
        .cost_file
        .as_ref()
        .context("--cost file needs --cost-file PATH")?;
    Ok(CostMatrix::from_rows(read_cost_rows(path)?)?)
}

/// The matrix handed to cost-sensitive multiclass learners.
fn multiclass_cost_matrix(args: &LearnerArgs, counts: &[u64]) -> Result<CostMatrix> {
    match args.cost {
        CostArg::Unit => Ok(CostMatrix::unit(counts.len())?),
        CostArg::InverseCount => Ok(cost_matrix_from_counts(counts).context(
            "inverse-count costs need every class present in the stream; \
             use --cost unit or --cost file instead",
        )?),
        CostArg::File => file_cost_matrix(args),
    }
}

/// Positive-class margin target for cost-sensitive binary learners: the
/// ratio of the two mistake costs. `None` keeps the running-ratio default.
fn binary_margin_target(args: &LearnerArgs) -> Result<Option<f64>> {
    match args.cost {
        CostArg::Unit => Ok(Some(1.0)),
        CostArg::InverseCount => Ok(None),
        CostArg::File => {
            let matrix = file_cost_matrix(args)?;
            ensure!(
                matrix.num_classes() == 2,
                "binary learners need a 2x2 cost file, got {} classes",
                matrix.num_classes()
            );
            Ok(Some(matrix.cost(0, 1) / matrix.cost(1, 0)))
        }
    }
}

fn matrix_rows(matrix: &CostMatrix) -> Vec<Vec<f64>> {
    (0..matrix.num_classes())
        .map(|i| {
            (0..matrix.num_classes())
                .map(|j| matrix.cost(i, j))
                .collect()
        })
        .collect()
}

/// Builds the per-algorithm learner recipes plus the shared resolved config.
pub fn resolve_experiment(
    command: &'static str,
    algo_names: &[String],
    data: &DataArgs,
    learner: &LearnerArgs,
    protocol: &ProtocolArgs,
) -> Result<Experiment> {
    ensure!(!algo_names.is_empty(), "no algorithm named");
    let dataset = load_dataset(data)?;
    let meta = dataset.meta().clone();
    let classes = meta.task.num_classes();

    let master_seed = resolve_seed(protocol.seed)?;
    let weights = EvalWeights::from_positive(protocol.eta_p)
        .context("--eta-p must lie in [0, 1]")?;
    ensure!(protocol.trials >= 1, "--trials must be at least 1");
    ensure!(protocol.stride >= 1, "--stride must be at least 1");
    let trial = TrialConfig {
        trials: protocol.trials,
        master_seed,
        stride: protocol.stride,
        weights,
    };

    let params = base_params(learner);
    let covariance = match learner.cov {
        CovArg::Diag => CovarianceMode::Diagonal,
        CovArg::Full => CovarianceMode::Full,
    };

    if learner.cost != CostArg::File && learner.cost_file.is_some() {
        bail!("--cost-file only applies with --cost file");
    }
    let tags = algo_names
        .iter()
        .map(|name| AlgoTag::parse(meta.task, name))
        .collect::<Result<Vec<_>>>()?;

    // Costs are resolved only when a named learner consumes them, so
    // cost-free learners still run on streams where a class is absent.
    let mut cost_model = "none".to_string();
    let mut cost_rows = None;
    let mut learners = Vec::with_capacity(tags.len());
    for tag in tags {
        let mut params = params.clone();
        let mut cost = None;
        if tag.is_cost_sensitive() {
            cost_model = cost_model_label(learner);
            match tag {
                AlgoTag::Binary(_) => {
                    if learner.imbalance_weight.is_none() {
                        params = params.with_imbalance_weight(binary_margin_target(learner)?);
                    }
                }
                AlgoTag::Multiclass(_) => {
                    let matrix = multiclass_cost_matrix(learner, &meta.class_counts)?;
                    cost_rows = Some(matrix_rows(&matrix));
                    cost = Some(matrix);
                }
            }
        }
        learners.push(LearnerSetup {
            tag,
            classes,
            dim: meta.dim,
            params,
            covariance,
            cost,
        });
    }

    let config = ResolvedConfig {
        command,
        algorithms: algo_names.to_vec(),
        task: match meta.task {
            TaskKind::Binary => "binary".to_string(),
            TaskKind::Multiclass { .. } => "multiclass".to_string(),
        },
        classes,
        dim: meta.dim,
        samples: meta.samples,
        source: meta.source,
        class_counts: meta.class_counts,
        trials: trial.trials,
        master_seed,
        stride: trial.stride,
        eta_p: weights.eta_p,
        eta_n: weights.eta_n,
        covariance: match covariance {
            CovarianceMode::Diagonal => "diagonal".to_string(),
            CovarianceMode::Full => "full".to_string(),
        },
        cost_model,
        cost_rows,
        // Single-algorithm commands embed that learner's resolved knobs;
        // bench embeds the shared base and each per-algorithm summary
        // carries its own.
        hyperparams: match &learners[..] {
            [only] => only.params.clone(),
            _ => params,
        },
        grid: None,
        validation_fraction: None,
    };

    Ok(Experiment {
        dataset,
        learners,
        trial,
        config,
        out_dir: protocol.out_dir.clone(),
    })
}

/// Runs the trial protocol for one learner recipe.
pub fn run_trials(dataset: &Dataset, trial: &TrialConfig, setup: &LearnerSetup) -> brook_core::Result<TrialReport> {
    match setup.tag {
        AlgoTag::Binary(algo) => {
            trial_suite(dataset, trial, || setup.binary(algo, &setup.params))
        }
        AlgoTag::Multiclass(algo) => {
            trial_suite(dataset, trial, || setup.multiclass(algo, &setup.params))
        }
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let exp = resolve_experiment(
        "run",
        std::slice::from_ref(&args.algo),
        &args.data,
        &args.learner,
        &args.protocol,
    )?;
    let setup = &exp.learners[0];
    let report = run_trials(&exp.dataset, &exp.trial, setup)
        .with_context(|| format!("running {}", setup.tag.name()))?;

    fs::create_dir_all(&exp.out_dir)
        .with_context(|| format!("creating {}", exp.out_dir.display()))?;
    let summary = exp.out_dir.join("summary.json");
    let curve = exp.out_dir.join("curve.csv");
    let timing = exp.out_dir.join("timing.json");
    report::write_summary(&summary, &exp.config, &report)?;
    report::write_curve(&curve, &exp.config, &report.curve)?;
    report::write_timing(&timing, &exp.config, &report)?;

    println!(
        "{} on {}: {}",
        setup.tag.name(),
        exp.config.source,
        report::describe_aggregate(&report.aggregate)
    );
    println!(
        "wrote {}, {}, {}",
        summary.display(),
        curve.display(),
        timing.display()
    );
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let exp = resolve_experiment("bench", &args.algo, &args.data, &args.learner, &args.protocol)?;
    fs::create_dir_all(&exp.out_dir)
        .with_context(|| format!("creating {}", exp.out_dir.display()))?;

    let mut rows = Vec::with_capacity(exp.learners.len());
    let mut checksums: Option<Vec<u64>> = None;
    let mut succeeded = 0usize;
    for setup in &exp.learners {
        match run_trials(&exp.dataset, &exp.trial, setup) {
            Ok(report) => {
                // Identical trial seeds must mean identical streams; a
                // mismatch would invalidate the paired comparison.
                match &checksums {
                    None => checksums = Some(report.stream_checksums.clone()),
                    Some(expected) => ensure!(
                        expected == &report.stream_checksums,
                        "stream pairing broke: {} consumed different shuffles",
                        setup.tag.name()
                    ),
                }
                let mut config = exp.config.clone();
                config.algorithms = vec![setup.tag.name().to_string()];
                config.hyperparams = setup.params.clone();
                report::write_summary(
                    &exp.out_dir.join(format!("summary-{}.json", setup.tag.name())),
                    &config,
                    &report,
                )?;
                succeeded += 1;
                rows.push(report::BenchRow::from_report(setup.tag.name(), &report));
            }
            Err(e) => rows.push(report::BenchRow::failed(setup.tag.name(), &e.to_string())),
        }
    }

    let table = exp.out_dir.join("bench.csv");
    report::write_bench(&table, &exp.config, &rows)?;
    for row in &rows {
        println!("{}", row.describe());
    }
    println!("wrote {}", table.display());
    ensure!(
        succeeded > 0,
        "every algorithm failed; see {}",
        table.display()
    );
    Ok(())
}

pub fn cmd_tune(args: &TuneArgs) -> Result<()> {
    let mut exp = resolve_experiment(
        "tune",
        std::slice::from_ref(&args.algo),
        &args.data,
        &args.learner,
        &args.protocol,
    )?;
    exp.config.grid = Some(args.grid.clone());
    exp.config.validation_fraction = Some(args.val_fraction);
    let setup = &exp.learners[0];
    ensure!(
        setup.tag.tunable(),
        "{} has no tuning knob; the grid would change nothing",
        setup.tag.name()
    );

    let prefix = brook_core::eval::validation_prefix(exp.dataset.len(), args.val_fraction)?;
    let criterion = SelectionCriterion::for_cost_sensitive(setup.tag.is_cost_sensitive());
    let examples = exp.dataset.examples();
    let weights = exp.trial.weights;
    let report: GridReport = grid_search(&args.grid, criterion, |value| {
        let params = setup.tag.apply_grid_value(&setup.params, value)?;
        let record = match setup.tag {
            AlgoTag::Binary(algo) => {
                let mut learner = setup.binary(algo, &params)?;
                prequential_run(
                    &mut learner,
                    prefix.iter().map(|&i| &examples[i]),
                    prefix.len(),
                    &weights,
                )?
            }
            AlgoTag::Multiclass(algo) => {
                let mut learner = setup.multiclass(algo, &params)?;
                prequential_run(
                    &mut learner,
                    prefix.iter().map(|&i| &examples[i]),
                    prefix.len(),
                    &weights,
                )?
            }
        };
        Ok(record.final_snapshot)
    })
    .with_context(|| format!("sweeping {}", setup.tag.name()))?;

    let selected = setup
        .tag
        .apply_grid_value(&setup.params, report.best_value)?;
    fs::create_dir_all(&exp.out_dir)
        .with_context(|| format!("creating {}", exp.out_dir.display()))?;
    let path = exp.out_dir.join("tune.json");
    report::write_tune(&path, &exp.config, &report, &selected)?;
    println!(
        "{}: best value {} (score {:.6}, {} grid points, {} validation samples)",
        setup.tag.name(),
        report.best_value,
        report.best_score,
        report.points.len(),
        prefix.len()
    );
    println!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    let spec = read_synth_spec(&args.synth)?;
    let dataset = generate_synthetic(&spec)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    write_sparse(&dataset, &args.out)?;
    let meta = dataset.meta();
    println!(
        "wrote {}: {} samples, dim {}, class counts {:?}",
        args.out.display(),
        meta.samples,
        meta.dim,
        meta.class_counts
    );
    Ok(())
}
