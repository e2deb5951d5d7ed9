//! Dataset ingestion and generation.
//!
//! Two on-disk formats are supported: header-first CSV with a named label
//! column, and sparse text where each line reads `label idx:val idx:val ...`
//! with strictly increasing 1-based indices. A seeded synthetic generator
//! provides imbalanced streams for testing, and
//! [`cost_matrix_from_counts`] derives misclassification costs from class
//! frequencies.

mod synthetic;

pub use synthetic::{generate_synthetic, SyntheticSpec};

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{BinaryLabel, ClassLabel, CostMatrix, FeatureVector};

/// Either a signed binary label or a 1-based class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Binary(BinaryLabel),
    Class(ClassLabel),
}

impl Label {
    /// Position of this label in confusion-matrix order: the positive class
    /// occupies row 0 and the negative class row 1; multiclass labels map to
    /// their zero-based index.
    pub fn confusion_index(&self) -> usize {
        match self {
            Label::Binary(BinaryLabel::Positive) => 0,
            Label::Binary(BinaryLabel::Negative) => 1,
            Label::Class(c) => c.index(),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Binary(BinaryLabel::Positive) => write!(f, "+1"),
            Label::Binary(BinaryLabel::Negative) => write!(f, "-1"),
            Label::Class(c) => write!(f, "{}", c.value()),
        }
    }
}

/// One input vector with its revealed label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub features: FeatureVector,
    pub label: Label,
}

/// Whether a dataset carries signed binary labels or k-way class labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TaskKind {
    Binary,
    Multiclass { classes: usize },
}

impl TaskKind {
    pub fn num_classes(&self) -> usize {
        match self {
            TaskKind::Binary => 2,
            TaskKind::Multiclass { classes } => *classes,
        }
    }
}

/// Shape summary of a loaded or generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetMeta {
    pub samples: usize,
    pub dim: usize,
    pub task: TaskKind,
    /// Per-class sample counts in confusion-matrix order.
    pub class_counts: Vec<u64>,
    pub source: String,
}

/// An immutable in-memory dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    meta: DatasetMeta,
    examples: Vec<LabeledExample>,
}

impl Dataset {
    /// Validates the examples against the task and computes the meta block.
    pub fn new(
        task: TaskKind,
        dim: usize,
        source: impl Into<String>,
        examples: Vec<LabeledExample>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("feature dimension must be at least 1"));
        }
        if examples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut class_counts = vec![0u64; task.num_classes()];
        for (i, ex) in examples.iter().enumerate() {
            if ex.features.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: ex.features.dim(),
                });
            }
            match (task, ex.label) {
                (TaskKind::Binary, Label::Binary(_)) => {}
                (TaskKind::Multiclass { classes }, Label::Class(c)) if c.value() <= classes => {}
                _ => {
                    return Err(Error::LabelSpace {
                        round: i + 1,
                        found: ex.label.to_string(),
                    })
                }
            }
            class_counts[ex.label.confusion_index()] += 1;
        }
        Ok(Dataset {
            meta: DatasetMeta {
                samples: examples.len(),
                dim,
                task,
                class_counts,
                source: source.into(),
            },
            examples,
        })
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// How CSV label tokens map onto labels.
#[derive(Debug, Clone)]
pub enum LabelMode {
    /// Listed tokens become the positive class, every other token the
    /// negative class.
    Binary { positive: Vec<String> },
    /// Explicit token-to-class table; class ids must cover `1..=k` without
    /// gaps. Unmapped tokens are an error.
    Multiclass { classes: Vec<(String, usize)> },
}

/// Column layout of a CSV source.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub label_column: String,
    pub mode: LabelMode,
}

impl LabelMode {
    fn task(&self) -> Result<TaskKind> {
        match self {
            LabelMode::Binary { positive } => {
                if positive.is_empty() {
                    return Err(Error::config("at least one positive label token required"));
                }
                Ok(TaskKind::Binary)
            }
            LabelMode::Multiclass { classes } => {
                if classes.is_empty() {
                    return Err(Error::config("class mapping table is empty"));
                }
                let k = classes.iter().map(|&(_, id)| id).max().unwrap_or(0);
                for id in 1..=k {
                    if !classes.iter().any(|&(_, c)| c == id) {
                        return Err(Error::config(format!(
                            "class mapping skips class {id} (ids must cover 1..={k})"
                        )));
                    }
                }
                if classes.iter().any(|&(_, id)| id == 0) {
                    return Err(Error::config("class ids are 1-based; 0 is not a class"));
                }
                let mut tokens: Vec<&str> = classes.iter().map(|(t, _)| t.as_str()).collect();
                tokens.sort_unstable();
                if tokens.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::config("duplicate token in class mapping"));
                }
                Ok(TaskKind::Multiclass { classes: k })
            }
        }
    }

    fn label_for(&self, token: &str) -> Option<Label> {
        match self {
            LabelMode::Binary { positive } => {
                let label = if positive.iter().any(|p| p == token) {
                    BinaryLabel::Positive
                } else {
                    BinaryLabel::Negative
                };
                Some(Label::Binary(label))
            }
            LabelMode::Multiclass { classes } => classes
                .iter()
                .find(|(t, _)| t == token)
                .map(|&(_, id)| Label::Class(ClassLabel::from_index(id - 1))),
        }
    }
}

/// Loads a header-first CSV file. Every column except the named label
/// column is parsed as a feature; the dimension is the column count minus
/// one.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let task = schema.mode.task()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(&path_str, e))?;
    let headers = reader
        .headers()
        .map_err(|e| csv_error(&path_str, e))?
        .clone();
    let label_idx = headers
        .iter()
        .position(|h| h == schema.label_column)
        .ok_or_else(|| {
            Error::config(format!(
                "label column '{}' not found in {path_str}",
                schema.label_column
            ))
        })?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    if feature_names.is_empty() {
        return Err(Error::config(format!(
            "{path_str} has no feature columns besides '{}'",
            schema.label_column
        )));
    }

    let mut examples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&path_str, e))?;
        let line = record.position().map_or(0, |p| p.line()) as usize;
        let token = record.get(label_idx).unwrap_or("");
        let label = schema.mode.label_for(token).ok_or_else(|| Error::Parse {
            path: path_str.clone(),
            line,
            detail: format!("label token '{token}' is not in the class mapping"),
        })?;
        let mut values = Vec::with_capacity(feature_names.len());
        for (i, cell) in record.iter().enumerate() {
            if i == label_idx {
                continue;
            }
            let name = headers.get(i).unwrap_or("?");
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line,
                detail: format!("column '{name}': cannot parse '{cell}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line,
                    detail: format!("column '{name}': non-finite value"),
                });
            }
            values.push(v);
        }
        examples.push(LabeledExample {
            features: FeatureVector::dense(values)?,
            label,
        });
    }
    Dataset::new(task, feature_names.len(), path_str, examples)
}

fn csv_error(path: &str, e: csv::Error) -> Error {
    let line = match e.kind() {
        csv::ErrorKind::UnequalLengths { pos, .. } => {
            pos.as_ref().map_or(0, |p| p.line() as usize)
        }
        _ => 0,
    };
    Error::Parse {
        path: path.to_string(),
        line,
        detail: e.to_string(),
    }
}

/// Loads a sparse text file. Labels are self-describing: files with only
/// `+1`/`-1` labels load as binary, files with class ids `1..=k` (k >= 3)
/// load as multiclass. Files using only `{1, 2}` are rejected as ambiguous;
/// recode two-class data as `+1`/`-1`.
///
/// The dimension is the largest feature index in the file unless
/// `declared_dim` pins it higher.
pub fn load_sparse(path: impl AsRef<Path>, declared_dim: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let file = BufReader::new(File::open(path)?);

    let mut rows: Vec<(i64, Vec<(usize, f64)>)> = Vec::new();
    let mut max_index = 0usize;
    for (line_no, line) in file.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line?;
        let mut tokens = line.split_whitespace();
        let Some(label_token) = tokens.next() else {
            continue; // blank line
        };
        let label: i64 = label_token.parse().map_err(|_| Error::Parse {
            path: path_str.clone(),
            line: line_no,
            detail: format!("cannot parse label '{label_token}'"),
        })?;
        let mut entries = Vec::new();
        let mut last_index = 0usize;
        for token in tokens {
            let (idx, val) = token.split_once(':').ok_or_else(|| Error::Parse {
                path: path_str.clone(),
                line: line_no,
                detail: format!("expected 'index:value', got '{token}'"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: line_no,
                detail: format!("cannot parse feature index '{idx}'"),
            })?;
            let val: f64 = val.parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: line_no,
                detail: format!("cannot parse feature value '{val}'"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line: line_no,
                    detail: "feature indices are 1-based".into(),
                });
            }
            if idx <= last_index {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line: line_no,
                    detail: format!("indices must be strictly increasing ({last_index} then {idx})"),
                });
            }
            if !val.is_finite() {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line: line_no,
                    detail: "non-finite feature value".into(),
                });
            }
            last_index = idx;
            entries.push((idx - 1, val));
        }
        max_index = max_index.max(last_index);
        rows.push((label, entries));
    }

    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = match declared_dim {
        Some(d) => {
            if max_index > d {
                return Err(Error::config(format!(
                    "declared dimension {d} is below the file's max index {max_index}"
                )));
            }
            d
        }
        None => max_index,
    };
    if dim == 0 {
        return Err(Error::config(
            "file has no feature entries and no dimension was declared",
        ));
    }

    let signed = rows.iter().all(|&(l, _)| l == 1 || l == -1);
    let task = if signed {
        TaskKind::Binary
    } else {
        let max_label = rows.iter().map(|&(l, _)| l).max().unwrap_or(0);
        if rows.iter().any(|&(l, _)| l < 1) {
            let bad = rows.iter().find(|&&(l, _)| l < 1).map(|&(l, _)| l).unwrap();
            return Err(Error::config(format!(
                "labels must be +1/-1 or positive class ids; found {bad}"
            )));
        }
        if max_label == 2 {
            return Err(Error::config(
                "labels {1, 2} are ambiguous between binary and 2-class data; \
                 recode binary labels as +1/-1",
            ));
        }
        TaskKind::Multiclass {
            classes: max_label as usize,
        }
    };

    let examples = rows
        .into_iter()
        .map(|(l, entries)| {
            let label = match task {
                TaskKind::Binary => Label::Binary(BinaryLabel::from_value(l)?),
                TaskKind::Multiclass { classes } => {
                    Label::Class(ClassLabel::new(l as usize, classes)?)
                }
            };
            Ok(LabeledExample {
                features: FeatureVector::sparse(dim, entries)?,
                label,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(task, dim, path_str, examples)
}

/// Writes a dataset in sparse text format. Zero components are omitted,
/// except that the first line always names the final coordinate so the file
/// pins its dimensionality on reload.
pub fn write_sparse(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let dim = dataset.meta().dim;
    for (row, ex) in dataset.examples().iter().enumerate() {
        write!(out, "{}", ex.label)?;
        let mut wrote_last = false;
        for (i, v) in ex.features.entries() {
            if v == 0.0 && !(row == 0 && i == dim - 1) {
                continue;
            }
            write!(out, " {}:{}", i + 1, v)?;
            wrote_last |= i == dim - 1;
        }
        if row == 0 && !wrote_last {
            write!(out, " {}:{}", dim, ex.features.get(dim - 1))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Derives a cost matrix from per-class counts: `c(i, j) = n_max / n_i` off
/// the diagonal, so the rarest class carries the largest cost and the
/// majority class costs exactly 1.
pub fn cost_matrix_from_counts(counts: &[u64]) -> Result<CostMatrix> {
    if counts.len() < 2 {
        return Err(Error::config("need counts for at least two classes"));
    }
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(Error::config(format!(
            "class {} has zero samples; costs are undefined",
            i + 1
        )));
    }
    let n_max = *counts.iter().max().expect("non-empty") as f64;
    let k = counts.len();
    let rows = (0..k)
        .map(|i| {
            let row_cost = n_max / counts[i] as f64;
            (0..k).map(|j| if i == j { 0.0 } else { row_cost }).collect()
        })
        .collect();
    CostMatrix::from_rows(rows)
}

/// Per-feature min-max ranges fitted on a sample of vectors; transforms
/// components to `[0, 1]`. Constant features map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl MinMaxScaler {
    /// Fits ranges over the given vectors. Components absent from a sparse
    /// vector count as zero, exactly as the learners see them.
    pub fn fit<'a>(dim: usize, sample: impl IntoIterator<Item = &'a FeatureVector>) -> Result<Self> {
        let mut mins = vec![f64::INFINITY; dim];
        let mut maxs = vec![f64::NEG_INFINITY; dim];
        let mut seen = false;
        for x in sample {
            if x.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.dim(),
                });
            }
            seen = true;
            for (i, v) in x.to_dense().into_iter().enumerate() {
                mins[i] = mins[i].min(v);
                maxs[i] = maxs[i].max(v);
            }
        }
        if !seen {
            return Err(Error::EmptyDataset);
        }
        Ok(MinMaxScaler { mins, maxs })
    }

    pub fn transform(&self, x: &FeatureVector) -> Result<FeatureVector> {
        if x.dim() != self.mins.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mins.len(),
                got: x.dim(),
            });
        }
        let values = x
            .to_dense()
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let range = self.maxs[i] - self.mins[i];
                if range > 0.0 {
                    ((v - self.mins[i]) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        FeatureVector::dense(values)
    }
}
