//! File formats: dataset CSV, experiment configuration JSON, results CSV
//! and the JSON-lines diagnostics stream. All writers are atomic
//! (temp file + rename).

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::bias::BiasSpec;
use crate::data::{Dataset, RngSeed};
use crate::datagen::{self, HypercubeSpec, MoonsSpec};
use crate::embedder::TrainConfig;
use crate::error::{Error, Result};
use crate::eval::{MetricName, MetricRecord, ProtocolConfig, RunDiagnostics};
use crate::selftrain::SelfTrainConfig;

/// A dataset file with its per-row label cells; rows with an empty label
/// cell form the unlabeled partition.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub row_labels: Vec<Option<u8>>,
    pub labeled_rows: Vec<usize>,
    pub unlabeled_rows: Vec<usize>,
}

impl LoadedDataset {
    /// The labeled rows as a standalone labeled dataset.
    pub fn labeled_dataset(&self) -> Result<Dataset> {
        let features = self.dataset.select_features(&self.labeled_rows);
        let labels = self
            .labeled_rows
            .iter()
            .map(|&i| self.row_labels[i].unwrap())
            .collect();
        let ids = self
            .dataset
            .ids()
            .map(|ids| self.labeled_rows.iter().map(|&i| ids[i].clone()).collect());
        Dataset::new(features, Some(labels), ids)
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Reads the dataset CSV: optional `id` column, optional `label` column
/// (0/1 or empty), remaining columns finite reals in fixed order.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<LoadedDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "empty file, header row required"))?;
    let columns: Vec<&str> = header.split(',').collect();
    let mut cursor = 0;
    let has_id = columns.first() == Some(&"id");
    if has_id {
        cursor += 1;
    }
    let has_label = columns.get(cursor) == Some(&"label");
    if has_label {
        cursor += 1;
    }
    let n_features = columns.len() - cursor;
    if n_features == 0 {
        return Err(parse_error(path, 1, "no feature columns"));
    }

    let mut ids = Vec::new();
    let mut row_labels: Vec<Option<u8>> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut n_rows = 0usize;
    for (line_idx, line) in lines {
        let lineno = line_idx + 1; // 1-based
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            return Err(parse_error(
                path,
                lineno,
                format!("expected {} cells, found {}", columns.len(), cells.len()),
            ));
        }
        let mut pos = 0;
        if has_id {
            ids.push(cells[pos].to_string());
            pos += 1;
        }
        if has_label {
            let cell = cells[pos];
            pos += 1;
            row_labels.push(match cell {
                "" => None,
                "0" => Some(0),
                "1" => Some(1),
                other => {
                    return Err(parse_error(
                        path,
                        lineno,
                        format!("non-binary label value '{other}'"),
                    ))
                }
            });
        }
        for cell in &cells[pos..] {
            let v: f64 = cell.parse().map_err(|_| {
                parse_error(path, lineno, format!("unparseable feature cell '{cell}'"))
            })?;
            if !v.is_finite() {
                return Err(parse_error(path, lineno, "non-finite feature value"));
            }
            values.push(v);
        }
        n_rows += 1;
    }

    let features = Array2::from_shape_vec((n_rows, n_features), values)
        .expect("row-major feature buffer matches shape");
    if !has_label {
        row_labels = vec![None; n_rows];
    }
    let labeled_rows: Vec<usize> = (0..n_rows).filter(|&i| row_labels[i].is_some()).collect();
    let unlabeled_rows: Vec<usize> = (0..n_rows).filter(|&i| row_labels[i].is_none()).collect();
    let labels = if has_label && unlabeled_rows.is_empty() && n_rows > 0 {
        Some(row_labels.iter().map(|l| l.unwrap()).collect())
    } else {
        None
    };
    let dataset = Dataset::new(features, labels, if has_id { Some(ids) } else { None })?;
    Ok(LoadedDataset {
        dataset,
        row_labels,
        labeled_rows,
        unlabeled_rows,
    })
}

/// Atomically writes `content` to `path` via a temp file in the same
/// directory.
fn atomic_write(path: impl AsRef<Path>, content: &str) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(content.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Writes the dataset CSV with id and label columns. Real numbers use the
/// shortest round-trip decimal representation.
pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("id,label");
    for j in 0..dataset.n_features() {
        write!(out, ",f{j}").unwrap();
    }
    out.push('\n');
    for i in 0..dataset.n_samples() {
        write!(out, "{}", dataset.id_of(i)).unwrap();
        match dataset.labels() {
            Some(labels) => write!(out, ",{}", labels[i]).unwrap(),
            None => out.push(','),
        }
        for j in 0..dataset.n_features() {
            write!(out, ",{}", dataset.features()[[i, j]]).unwrap();
        }
        out.push('\n');
    }
    atomic_write(path, &out)
}

/// Writes a selected-index list as a one-column CSV.
pub fn write_indices(indices: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("index\n");
    for i in indices {
        writeln!(out, "{i}").unwrap();
    }
    atomic_write(path, &out)
}

/// Dataset input: an on-disk CSV or a generator spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Path {
        path: String,
    },
    Moons {
        #[serde(default = "default_n_samples")]
        n_samples: usize,
        #[serde(default = "default_noise")]
        noise_stddev: f64,
    },
    Hypercube {
        #[serde(default = "default_n_samples")]
        n_samples: usize,
        n_features: usize,
        n_informative: usize,
        #[serde(default = "default_clusters")]
        clusters_per_class: usize,
        #[serde(default = "default_side")]
        hypercube_side: f64,
        #[serde(default = "default_stddev")]
        cluster_stddev: f64,
    },
}

fn default_n_samples() -> usize {
    2000
}

fn default_noise() -> f64 {
    0.1
}

fn default_clusters() -> usize {
    2
}

fn default_side() -> f64 {
    3.0
}

fn default_stddev() -> f64 {
    1.0
}

impl DatasetSource {
    /// Loads or generates the labeled dataset this source describes.
    pub fn load(&self, seed: RngSeed) -> Result<Dataset> {
        match self {
            DatasetSource::Path { path } => {
                let loaded = read_dataset(path)?;
                if loaded.unlabeled_rows.is_empty() && loaded.dataset.labels().is_some() {
                    Ok(loaded.dataset)
                } else {
                    loaded.labeled_dataset()
                }
            }
            DatasetSource::Moons {
                n_samples,
                noise_stddev,
            } => datagen::generate_moons(&MoonsSpec {
                n_samples: *n_samples,
                noise_stddev: *noise_stddev,
                seed,
            }),
            DatasetSource::Hypercube {
                n_samples,
                n_features,
                n_informative,
                clusters_per_class,
                hypercube_side,
                cluster_stddev,
            } => datagen::generate_hypercube(&HypercubeSpec {
                n_samples: *n_samples,
                n_features: *n_features,
                n_informative: *n_informative,
                clusters_per_class: *clusters_per_class,
                hypercube_side: *hypercube_side,
                cluster_stddev: *cluster_stddev,
                seed,
            }),
        }
    }
}

/// Evaluation-protocol section of the experiment config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub n_folds: usize,
    pub labeled_fraction: f64,
    pub validation_fraction: f64,
    pub auto_p: bool,
    pub metrics: Vec<MetricName>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            n_folds: 10,
            labeled_fraction: 0.3,
            validation_fraction: 0.2,
            auto_p: true,
            metrics: vec![MetricName::Auroc],
        }
    }
}

/// The experiment configuration document. Unknown keys are rejected; every
/// default is filled in on load and echoed into the results header.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_experiment_name")]
    pub name: String,
    pub dataset: DatasetSource,
    pub bias: BiasSpec,
    #[serde(default)]
    pub model: TrainConfig,
    #[serde(default)]
    pub selftrain: SelfTrainConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_experiment_name() -> String {
    "experiment".to_string()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn seed(&self) -> RngSeed {
        RngSeed(self.seed)
    }

    /// Short description of the dataset source for the results CSV.
    pub fn dataset_name(&self) -> String {
        match &self.dataset {
            DatasetSource::Path { path } => path.clone(),
            DatasetSource::Moons { n_samples, .. } => format!("moons{n_samples}"),
            DatasetSource::Hypercube {
                n_features,
                n_informative,
                ..
            } => format!("hypercube{n_features}x{n_informative}"),
        }
    }

    pub fn protocol(&self, jobs: usize) -> ProtocolConfig {
        ProtocolConfig {
            n_folds: self.eval.n_folds,
            labeled_fraction: self.eval.labeled_fraction,
            validation_fraction: self.eval.validation_fraction,
            model: self.model,
            selftrain: self.selftrain,
            auto_p: self.eval.auto_p,
            jobs,
        }
    }
}

/// Results CSV: a `# config: {...}` provenance comment followed by a header
/// and one row per MetricRecord. No timestamps, so identical config + seed
/// reproduces the file byte for byte.
pub fn results_csv(
    records: &[MetricRecord],
    experiment: &str,
    dataset: &str,
    config: &ExperimentConfig,
) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# config: {}",
        serde_json::to_string(config).expect("config serializes")
    )
    .unwrap();
    out.push_str("experiment,dataset,method,fold,metric,value,seed\n");
    for r in records {
        writeln!(
            out,
            "{experiment},{dataset},{},{},{},{},{}",
            r.method.name(),
            r.fold,
            r.metric.name(),
            r.value,
            config.seed
        )
        .unwrap();
    }
    out
}

pub fn write_results(
    records: &[MetricRecord],
    experiment: &str,
    dataset: &str,
    config: &ExperimentConfig,
    path: impl AsRef<Path>,
) -> Result<()> {
    atomic_write(path, &results_csv(records, experiment, dataset, config))
}

/// One parsed row of a results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsRow {
    pub experiment: String,
    pub dataset: String,
    pub method: String,
    pub fold: usize,
    pub metric: String,
    pub value: f64,
    pub seed: u64,
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultsRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (line_idx, line) in text.lines().enumerate() {
        let lineno = line_idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "experiment,dataset,method,fold,metric,value,seed" {
                return Err(parse_error(path, lineno, "unexpected results header"));
            }
            saw_header = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 7 {
            return Err(parse_error(path, lineno, "expected 7 cells"));
        }
        rows.push(ResultsRow {
            experiment: cells[0].to_string(),
            dataset: cells[1].to_string(),
            method: cells[2].to_string(),
            fold: cells[3]
                .parse()
                .map_err(|_| parse_error(path, lineno, "bad fold"))?,
            metric: cells[4].to_string(),
            value: cells[5]
                .parse()
                .map_err(|_| parse_error(path, lineno, "bad value"))?,
            seed: cells[6]
                .parse()
                .map_err(|_| parse_error(path, lineno, "bad seed"))?,
        });
    }
    if !saw_header {
        return Err(parse_error(path, 1, "missing results header"));
    }
    Ok(rows)
}

/// Diagnostics line: one self-training iteration of one run.
#[derive(Debug, Clone, Serialize)]
struct DiagnosticsLine<'a> {
    method: &'a str,
    fold: usize,
    #[serde(flatten)]
    record: &'a crate::selftrain::IterationRecord,
}

/// JSON-lines diagnostics: one line per iteration record per run.
pub fn write_diagnostics(runs: &[RunDiagnostics], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for run in runs {
        for record in &run.records {
            let line = DiagnosticsLine {
                method: run.method.name(),
                fold: run.fold,
                record,
            };
            writeln!(out, "{}", serde_json::to_string(&line)?).unwrap();
        }
    }
    atomic_write(path, &out)
}

/// Per-method medians and Wilcoxon p-values vs the biased supervised arm,
/// serialized as the summary JSON.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub metric: String,
    pub medians: Vec<(String, f64)>,
    /// (method, p-value) for each method paired against supervised_bias.
    pub wilcoxon_vs_supervised_bias: Vec<(String, f64)>,
}

pub fn summarize(rows: &[ResultsRow], metric: &str) -> Summary {
    use std::collections::BTreeMap;
    let mut by_method: BTreeMap<&str, BTreeMap<usize, f64>> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.metric == metric) {
        by_method
            .entry(&row.method)
            .or_default()
            .insert(row.fold, row.value);
    }
    let medians: Vec<(String, f64)> = by_method
        .iter()
        .map(|(m, folds)| {
            let values: Vec<f64> = folds.values().copied().collect();
            (m.to_string(), crate::eval::median(&values))
        })
        .collect();
    let mut wilcoxon = Vec::new();
    if let Some(baseline) = by_method.get("supervised_bias") {
        for (method, folds) in &by_method {
            if *method == "supervised_bias" {
                continue;
            }
            let shared: Vec<usize> = folds
                .keys()
                .filter(|f| baseline.contains_key(f))
                .copied()
                .collect();
            if shared.len() < 5 {
                continue;
            }
            let a: Vec<f64> = shared.iter().map(|f| folds[f]).collect();
            let b: Vec<f64> = shared.iter().map(|f| baseline[f]).collect();
            if let Ok(r) = crate::eval::wilcoxon_signed_rank(&a, &b) {
                wilcoxon.push((method.to_string(), r.p_value));
            }
        }
    }
    Summary {
        experiment: rows
            .first()
            .map(|r| r.experiment.clone())
            .unwrap_or_default(),
        metric: metric.to_string(),
        medians,
        wilcoxon_vs_supervised_bias: wilcoxon,
    }
}

pub fn write_summary(summary: &Summary, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    atomic_write(path, &text)
}

/// Model checkpoint: layer shapes, row-major weights and the train config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCheckpoint {
    pub model: crate::embedder::EmbeddingModel,
    pub config: TrainConfig,
}

pub fn write_checkpoint(checkpoint: &ModelCheckpoint, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(checkpoint)?;
    text.push('\n');
    atomic_write(path, &text)
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<ModelCheckpoint> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
