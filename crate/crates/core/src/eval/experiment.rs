//! The cross-validated benchmark protocol: shared folds, bias induction,
//! five training arms and per-fold metric records.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::bias::{self, BiasSpec};
use crate::data::{self, Dataset, RngSeed};
use crate::embedder::{EmbeddingModel, TrainConfig};
use crate::error::Result;
use crate::eval::metrics;
use crate::pseudolabel::knn_confidence;
use crate::selftrain::{self, IterationRecord, SelfTrainConfig, SelfTrainInput, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SupervisedNobias,
    SupervisedBias,
    SupervisedRandom,
    MetricSt,
    MetricDst,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::SupervisedNobias,
        Method::SupervisedBias,
        Method::SupervisedRandom,
        Method::MetricSt,
        Method::MetricDst,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::SupervisedNobias => "supervised_nobias",
            Method::SupervisedBias => "supervised_bias",
            Method::SupervisedRandom => "supervised_random",
            Method::MetricSt => "metric_st",
            Method::MetricDst => "metric_dst",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.iter().copied().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Auroc,
    Auprc,
}

impl MetricName {
    pub fn name(&self) -> &'static str {
        match self {
            MetricName::Auroc => "auroc",
            MetricName::Auprc => "auprc",
        }
    }

    pub fn parse(s: &str) -> Option<MetricName> {
        match s {
            "auroc" => Some(MetricName::Auroc),
            "auprc" => Some(MetricName::Auprc),
            _ => None,
        }
    }
}

/// One per-fold metric observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub method: Method,
    pub fold: usize,
    pub metric: MetricName,
    pub value: f64,
}

/// Self-training diagnostics for one (method, fold) run. `added_indices`
/// are rows of the parent dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub method: Method,
    pub fold: usize,
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub n_folds: usize,
    /// Fraction of each train set kept labeled (the rest becomes the pool).
    pub labeled_fraction: f64,
    /// Fraction of the (possibly biased) labeled subset carved out as the
    /// validation set for self-training early stopping.
    pub validation_fraction: f64,
    pub model: TrainConfig,
    pub selftrain: SelfTrainConfig,
    /// When set, p is derived per fold as the greatest even integer at most
    /// sqrt of the training selection size, overriding `selftrain.p`.
    pub auto_p: bool,
    pub jobs: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            n_folds: 10,
            labeled_fraction: 0.3,
            validation_fraction: 0.2,
            model: TrainConfig::default(),
            selftrain: SelfTrainConfig::default(),
            auto_p: true,
            jobs: 1,
        }
    }
}

pub struct ExperimentOutcome {
    pub records: Vec<MetricRecord>,
    pub diagnostics: Vec<RunDiagnostics>,
}

/// kNN confidence scores for the test rows against a labeled reference set
/// in the model's embedding space.
fn score_with_knn(
    model: &EmbeddingModel,
    reference_features: ArrayView2<f64>,
    reference_labels: &[u8],
    test_features: ArrayView2<f64>,
    k: usize,
) -> Result<Vec<f64>> {
    let ref_z = model.embed(reference_features)?;
    let test_z = model.embed(test_features)?;
    let k = k.min(ref_z.nrows());
    (0..test_z.nrows())
        .map(|i| knn_confidence(test_z.row(i), ref_z.view(), reference_labels, k))
        .collect()
}

struct FoldOutput {
    records: Vec<MetricRecord>,
    diagnostics: Vec<RunDiagnostics>,
}

fn run_fold(
    dataset: &Dataset,
    bias_spec: &BiasSpec,
    config: &ProtocolConfig,
    methods: &[Method],
    metric_names: &[MetricName],
    fold: usize,
    train: &[usize],
    test: &[usize],
    seed: RngSeed,
) -> Result<FoldOutput> {
    let fold_seed = seed.fork(0xF01D_0000 + fold as u64);
    let split = data::labeled_unlabeled_split(
        train,
        config.labeled_fraction,
        dataset,
        fold_seed.fork(1),
    )?;

    let mut biased = bias_spec.apply(dataset, &split.labeled, fold_seed.fork(2))?;
    biased.sort_unstable();
    let mut random = bias::random_select(
        &split.labeled,
        dataset,
        bias_spec.selection_size(),
        fold_seed.fork(3),
    )?;
    random.sort_unstable();

    let test_features = dataset.select_features(test);
    let test_labels = dataset.select_labels(test)?;

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let push_metrics = |records: &mut Vec<MetricRecord>,
                            method: Method,
                            scores: &[f64]|
     -> Result<()> {
        for &metric in metric_names {
            let value = match metric {
                MetricName::Auroc => metrics::auroc(scores, &test_labels)?,
                MetricName::Auprc => metrics::auprc(scores, &test_labels)?,
            };
            records.push(MetricRecord {
                method,
                fold,
                metric,
                value,
            });
        }
        Ok(())
    };

    // shared validation carve-out from the biased selection for both
    // self-training strategies
    let carve = data::labeled_unlabeled_split(
        &biased,
        config.validation_fraction,
        dataset,
        fold_seed.fork(4),
    )?;
    let validation_idx = carve.labeled;
    let st_labeled_idx = carve.unlabeled;

    for &method in methods {
        match method {
            Method::SupervisedNobias | Method::SupervisedBias | Method::SupervisedRandom => {
                let train_idx: &[usize] = match method {
                    Method::SupervisedNobias => &split.labeled,
                    Method::SupervisedBias => &biased,
                    _ => &random,
                };
                let f = dataset.select_features(train_idx);
                let y = dataset.select_labels(train_idx)?;
                let init = EmbeddingModel::init(
                    dataset.n_features(),
                    config.model.hidden_dim,
                    config.model.out_dim,
                    fold_seed.fork(10),
                );
                let train_cfg = TrainConfig {
                    seed: fold_seed.fork(11),
                    ..config.model
                };
                let (model, _) = crate::embedder::train(&init, f.view(), &y, &train_cfg)?;
                let scores = score_with_knn(
                    &model,
                    f.view(),
                    &y,
                    test_features.view(),
                    config.selftrain.knn_k,
                )?;
                push_metrics(&mut records, method, &scores)?;
            }
            Method::MetricSt | Method::MetricDst => {
                let strategy = if method == Method::MetricSt {
                    Strategy::St
                } else {
                    Strategy::Dst
                };
                let labeled_f = dataset.select_features(&st_labeled_idx);
                let labeled_y = dataset.select_labels(&st_labeled_idx)?;
                let pool_f = dataset.select_features(&split.unlabeled);
                let val_f = dataset.select_features(&validation_idx);
                let val_y = dataset.select_labels(&validation_idx)?;
                let p = if config.auto_p {
                    selftrain::default_p(biased.len())?
                } else {
                    config.selftrain.p
                };
                let st_cfg = SelfTrainConfig {
                    strategy,
                    p,
                    seed: fold_seed.fork(20 + strategy as u64),
                    ..config.selftrain
                };
                let input = SelfTrainInput {
                    labeled_features: labeled_f.view(),
                    labeled_labels: &labeled_y,
                    pool_features: pool_f.view(),
                    validation_features: val_f.view(),
                    validation_labels: &val_y,
                };
                let outcome = selftrain::run_self_training(&input, &config.model, &st_cfg)?;
                // validation rows are held out from training only; at
                // inference they rejoin the labeled kNN reference
                let n_ref = outcome.final_features.nrows() + val_f.nrows();
                let mut ref_f = Array2::zeros((n_ref, dataset.n_features()));
                ref_f
                    .slice_mut(ndarray::s![..outcome.final_features.nrows(), ..])
                    .assign(&outcome.final_features);
                ref_f
                    .slice_mut(ndarray::s![outcome.final_features.nrows().., ..])
                    .assign(&val_f);
                let mut ref_y = outcome.final_labels.clone();
                ref_y.extend_from_slice(&val_y);
                let scores = score_with_knn(
                    &outcome.model,
                    ref_f.view(),
                    &ref_y,
                    test_features.view(),
                    config.selftrain.knn_k,
                )?;
                push_metrics(&mut records, method, &scores)?;
                // translate pool-row indices back to dataset rows
                let run_records: Vec<IterationRecord> = outcome
                    .records
                    .into_iter()
                    .map(|mut r| {
                        r.added_indices =
                            r.added_indices.iter().map(|&i| split.unlabeled[i]).collect();
                        r
                    })
                    .collect();
                diagnostics.push(RunDiagnostics {
                    method,
                    fold,
                    records: run_records,
                });
            }
        }
    }
    Ok(FoldOutput {
        records,
        diagnostics,
    })
}

/// Runs one fold of the protocol in isolation: the fold split is taken
/// from the same stratified deal as the full experiment, so fold f here
/// reproduces fold f of `run_benchmark_experiment` exactly.
pub fn run_single_fold(
    dataset: &Dataset,
    bias_spec: &BiasSpec,
    config: &ProtocolConfig,
    methods: &[Method],
    metric_names: &[MetricName],
    fold: usize,
    seed: RngSeed,
) -> Result<ExperimentOutcome> {
    let folds = data::stratified_kfold(dataset, config.n_folds, seed.fork(0xCF))?;
    let split = folds.get(fold).ok_or_else(|| {
        crate::error::Error::InvalidArgument(format!(
            "fold {fold} out of range for {} folds",
            config.n_folds
        ))
    })?;
    let out = run_fold(
        dataset,
        bias_spec,
        config,
        methods,
        metric_names,
        fold,
        &split.train,
        &split.test,
        seed,
    )?;
    Ok(ExperimentOutcome {
        records: out.records,
        diagnostics: out.diagnostics,
    })
}

/// Runs the full cross-validated protocol for the requested methods.
/// All methods within a fold share the same train/test split, the same
/// labeled/unlabeled division and the same biased selection.
pub fn run_benchmark_experiment(
    dataset: &Dataset,
    bias_spec: &BiasSpec,
    config: &ProtocolConfig,
    methods: &[Method],
    metric_names: &[MetricName],
    seed: RngSeed,
) -> Result<ExperimentOutcome> {
    let folds = data::stratified_kfold(dataset, config.n_folds, seed.fork(0xCF))?;
    let run_one = |(fold, split): (usize, &crate::data::SplitIndices)| {
        run_fold(
            dataset,
            bias_spec,
            config,
            methods,
            metric_names,
            fold,
            &split.train,
            &split.test,
            seed,
        )
    };

    let outputs: Vec<Result<FoldOutput>> = if config.jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| crate::error::Error::InvalidArgument(e.to_string()))?;
        pool.install(|| folds.iter().enumerate().par_bridge().map(run_one).collect())
    } else {
        folds.iter().enumerate().map(run_one).collect()
    };

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for out in outputs {
        let out = out?;
        records.extend(out.records);
        diagnostics.extend(out.diagnostics);
    }
    // parallel fold order is nondeterministic; normalize
    let method_rank =
        |m: Method| Method::ALL.iter().position(|&x| x == m).unwrap();
    records.sort_by_key(|r| (method_rank(r.method), r.fold));
    diagnostics.sort_by_key(|d| (method_rank(d.method), d.fold));
    Ok(ExperimentOutcome {
        records,
        diagnostics,
    })
}

/// Exhaustive search over the Cartesian product of the grid, in the given
/// deterministic order; the first assignment reaching the minimum objective
/// wins ties.
pub fn grid_search<F>(grid: &[(String, Vec<f64>)], mut objective: F) -> (Vec<(String, f64)>, f64)
where
    F: FnMut(&[(String, f64)]) -> f64,
{
    assert!(!grid.is_empty(), "empty parameter grid");
    let mut cursor = vec![0usize; grid.len()];
    let mut best: Option<(Vec<(String, f64)>, f64)> = None;
    loop {
        let assignment: Vec<(String, f64)> = grid
            .iter()
            .zip(&cursor)
            .map(|((name, values), &i)| (name.clone(), values[i]))
            .collect();
        let value = objective(&assignment);
        let better = match &best {
            None => true,
            Some((_, b)) => value < *b,
        };
        if better {
            best = Some((assignment, value));
        }
        // odometer advance
        let mut pos = grid.len();
        loop {
            if pos == 0 {
                return best.unwrap();
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < grid[pos].1.len() {
                break;
            }
            cursor[pos] = 0;
        }
    }
}

/// Median of a value list; NaN-free input assumed.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
