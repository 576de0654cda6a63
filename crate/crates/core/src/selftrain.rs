//! Self-training orchestration: conventional confidence-ranked selection
//! (Metric-ST) and diversity-guided probe selection (Metric-DST), iterated
//! with validation-loss early stopping.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::RngSeed;
use crate::embedder::{self, EmbeddingModel, TrainConfig};
use crate::error::{Error, Result};
use crate::pseudolabel::{probe_distance, pseudolabel_pool, PseudoLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Confidence-ranked selection, not class-aware.
    St,
    /// Diversity-guided probe selection with class balancing.
    Dst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelfTrainConfig {
    /// Pseudo-samples added per iteration; must be even.
    pub p: usize,
    /// Confidence threshold in (0.5, 1).
    pub mu: f64,
    pub max_iterations: usize,
    /// Rounds without validation-loss improvement before stopping.
    pub patience: usize,
    pub strategy: Strategy,
    /// DST probe budget = this multiplier times p, shared across classes.
    pub attempt_cap_multiplier: usize,
    /// Neighbors for pseudo-label confidence.
    pub knn_k: usize,
    /// Retrain the embedder from scratch each iteration instead of
    /// warm-starting from the previous weights.
    pub retrain_fresh: bool,
    pub seed: RngSeed,
}

impl Default for SelfTrainConfig {
    fn default() -> Self {
        SelfTrainConfig {
            p: 10,
            mu: 0.9,
            max_iterations: 100,
            patience: 5,
            strategy: Strategy::Dst,
            attempt_cap_multiplier: 50,
            knn_k: 5,
            retrain_fresh: false,
            seed: RngSeed(0),
        }
    }
}

impl SelfTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 || self.p % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "p = {} must be even and >= 2",
                self.p
            )));
        }
        if !(self.mu > 0.5 && self.mu < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "mu = {} outside (0.5, 1)",
                self.mu
            )));
        }
        if self.max_iterations == 0 || self.patience == 0 || self.attempt_cap_multiplier == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations, patience and attempt_cap_multiplier must be positive".into(),
            ));
        }
        if self.knn_k == 0 {
            return Err(Error::InvalidArgument("knn_k must be positive".into()));
        }
        Ok(())
    }
}

/// Diagnostics for one self-training iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Pool-row indices of the samples moved into the labeled set.
    pub added_indices: Vec<usize>,
    pub added_labels: Vec<u8>,
    pub added_confidences: Vec<f64>,
    /// Embedding coordinates of the added samples at selection time.
    pub added_embeddings: Vec<Vec<f64>>,
    pub validation_loss: Option<f64>,
    /// Probes consumed this iteration (DST only; 0 for ST).
    pub probe_attempts: usize,
}

/// Largest even integer at most sqrt(n).
pub fn default_p(n_labeled: usize) -> Result<usize> {
    if n_labeled < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 labeled samples for p >= 2, got {n_labeled}"
        )));
    }
    let mut p = (n_labeled as f64).sqrt().floor() as usize;
    if p % 2 != 0 {
        p -= 1;
    }
    Ok(p)
}

/// Symmetric confidence score: distance of the class-1 probability from 0.5,
/// expressed as the confidence in the predicted class.
fn symmetric_score(label: &PseudoLabel) -> f64 {
    label.confidence.max(1.0 - label.confidence)
}

/// Conventional self-training selection: rank by symmetric confidence,
/// keep scores >= mu, return the top p. Not class-aware.
pub fn select_st(pseudolabels: &[PseudoLabel], p: usize, mu: f64) -> Vec<PseudoLabel> {
    let mut eligible: Vec<&PseudoLabel> = pseudolabels
        .iter()
        .filter(|l| symmetric_score(l) >= mu)
        .collect();
    eligible.sort_by(|a, b| {
        symmetric_score(b)
            .partial_cmp(&symmetric_score(a))
            .unwrap()
            .then(a.sample_index.cmp(&b.sample_index))
    });
    eligible.truncate(p);
    eligible.into_iter().cloned().collect()
}

/// Diversity-guided selection: uniform random probes in [0,1]^out_dim, each
/// matched to its nearest not-yet-selected pseudo-labeled sample, accepted
/// when that sample is predicted as the target class with confidence at
/// least mu. p/2 samples per class, sharing a probe budget of `attempt_cap`
/// total attempts; an exhausted budget triggers majority-side undersampling
/// so the returned selection stays class-balanced.
///
/// Returns the selection and the number of probes consumed.
pub fn select_dst(
    pseudolabels: &[PseudoLabel],
    p: usize,
    mu: f64,
    out_dim: usize,
    attempt_cap: usize,
    seed: RngSeed,
) -> (Vec<PseudoLabel>, usize) {
    let mut rng = seed.rng();
    let mut selected = vec![false; pseudolabels.len()];
    let mut accepted: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let per_class = p / 2;
    let mut attempts = 0usize;

    for &class in &[1u8, 0u8] {
        while accepted[class as usize].len() < per_class && attempts < attempt_cap {
            attempts += 1;
            let probe: Vec<f64> = (0..out_dim).map(|_| rng.gen_range(0.0..1.0)).collect();
            // nearest over all unselected candidates; the class filter acts
            // at acceptance so probes landing in the other class's region
            // are rejected instead of snapping to a far-away outlier
            let nearest = pseudolabels
                .iter()
                .enumerate()
                .filter(|(i, _)| !selected[*i])
                .min_by(|(ia, a), (ib, b)| {
                    probe_distance(&probe, a)
                        .partial_cmp(&probe_distance(&probe, b))
                        .unwrap()
                        .then(ia.cmp(ib))
                });
            if let Some((i, label)) = nearest {
                if label.predicted_label == class && label.class_score(class) >= mu {
                    selected[i] = true;
                    accepted[class as usize].push(i);
                }
            }
        }
    }

    let target = accepted[0].len().min(accepted[1].len());
    for side in accepted.iter_mut() {
        if side.len() > target {
            side.shuffle(&mut rng);
            side.truncate(target);
            side.sort_unstable();
        }
    }
    let picks: Vec<PseudoLabel> = accepted[1]
        .iter()
        .chain(accepted[0].iter())
        .map(|&i| pseudolabels[i].clone())
        .collect();
    (picks, attempts)
}

/// Inputs for one self-training run. The pool carries no labels; validation
/// is only used for the early-stopping loss.
pub struct SelfTrainInput<'a> {
    pub labeled_features: ArrayView2<'a, f64>,
    pub labeled_labels: &'a [u8],
    pub pool_features: ArrayView2<'a, f64>,
    pub validation_features: ArrayView2<'a, f64>,
    pub validation_labels: &'a [u8],
}

pub struct SelfTrainOutcome {
    pub model: EmbeddingModel,
    pub records: Vec<IterationRecord>,
    /// The labeled set paired with the returned model: the original labeled
    /// samples plus the pseudo-labels absorbed up to the best-validation
    /// iteration. Serves as the model's kNN reference at inference time.
    pub final_features: Array2<f64>,
    pub final_labels: Vec<u8>,
}

fn validation_loss(
    model: &EmbeddingModel,
    features: ArrayView2<f64>,
    labels: &[u8],
    config: &TrainConfig,
) -> Result<Option<f64>> {
    if features.nrows() < 2 {
        return Ok(None);
    }
    let z = model.embed(features)?;
    Ok(embedder::mean_contrastive_loss(
        z.view(),
        labels,
        config.m_pos,
        config.m_neg,
    ))
}

/// The self-training loop: train the embedder, pseudo-label the pool,
/// select (ST or DST), absorb the selection into the labeled set, repeat.
/// Stops on patience, empty selection, empty pool or the iteration cap, and
/// returns the model snapshot with the best validation loss.
pub fn run_self_training(
    input: &SelfTrainInput,
    model_config: &TrainConfig,
    config: &SelfTrainConfig,
) -> Result<SelfTrainOutcome> {
    config.validate()?;
    model_config.validate()?;

    let n_features = input.labeled_features.ncols();
    let mut labeled_f = input.labeled_features.to_owned();
    let mut labeled_y = input.labeled_labels.to_vec();
    let mut remaining: Vec<usize> = (0..input.pool_features.nrows()).collect();

    let fit = |model: &EmbeddingModel, f: ArrayView2<f64>, y: &[u8], tag: u64| {
        let cfg = TrainConfig {
            seed: config.seed.fork(0x7261_0000 + tag),
            ..*model_config
        };
        embedder::train(model, f, y, &cfg)
    };

    let fresh = |tag: u64| {
        EmbeddingModel::init(
            n_features,
            model_config.hidden_dim,
            model_config.out_dim,
            config.seed.fork(0x1011_0000 + tag),
        )
    };

    // initial supervised fit
    let (mut model, _) = fit(&fresh(0), labeled_f.view(), &labeled_y, 0)?;
    let mut best_loss = validation_loss(
        &model,
        input.validation_features,
        input.validation_labels,
        model_config,
    )?;
    let mut best_model = model.clone();
    // labeled set paired with the best model, used as its kNN reference
    let mut best_f = labeled_f.clone();
    let mut best_y = labeled_y.clone();
    let mut stale = 0usize;
    let mut records = Vec::new();

    for iteration in 1..=config.max_iterations {
        if remaining.is_empty() {
            break;
        }
        let pool_view = {
            let mut m = Array2::zeros((remaining.len(), n_features));
            for (r, &i) in remaining.iter().enumerate() {
                m.row_mut(r).assign(&input.pool_features.row(i));
            }
            m
        };
        let pseudolabels = pseudolabel_pool(
            &model,
            labeled_f.view(),
            &labeled_y,
            pool_view.view(),
            config.knn_k.min(labeled_f.nrows()),
        )?;

        let (picked, probe_attempts) = match config.strategy {
            Strategy::St => (select_st(&pseudolabels, config.p, config.mu), 0),
            Strategy::Dst => select_dst(
                &pseudolabels,
                config.p,
                config.mu,
                model_config.out_dim,
                config.attempt_cap_multiplier * config.p,
                config.seed.fork(0xd57_0000 + iteration as u64),
            ),
        };
        if picked.is_empty() {
            break;
        }

        // absorb the selection: rows move from the pool into the labeled set
        let mut grown = Array2::zeros((labeled_f.nrows() + picked.len(), n_features));
        grown
            .slice_mut(ndarray::s![..labeled_f.nrows(), ..])
            .assign(&labeled_f);
        let mut removed: Vec<usize> = Vec::with_capacity(picked.len());
        for (offset, label) in picked.iter().enumerate() {
            grown
                .row_mut(labeled_f.nrows() + offset)
                .assign(&pool_view.row(label.sample_index));
            labeled_y.push(label.predicted_label);
            removed.push(remaining[label.sample_index]);
        }
        labeled_f = grown;
        let removed_set: std::collections::HashSet<usize> = removed.iter().copied().collect();
        remaining.retain(|i| !removed_set.contains(i));

        let start = if config.retrain_fresh {
            fresh(iteration as u64)
        } else {
            model
        };
        let (next, _) = fit(&start, labeled_f.view(), &labeled_y, iteration as u64)?;
        model = next;

        let val = validation_loss(
            &model,
            input.validation_features,
            input.validation_labels,
            model_config,
        )?;
        records.push(IterationRecord {
            iteration,
            added_indices: removed,
            added_labels: picked.iter().map(|l| l.predicted_label).collect(),
            added_confidences: picked.iter().map(|l| l.confidence).collect(),
            added_embeddings: picked.iter().map(|l| l.embedding.clone()).collect(),
            validation_loss: val,
            probe_attempts,
        });

        match (val, best_loss) {
            (Some(v), Some(b)) if v < b => {
                best_loss = Some(v);
                best_model = model.clone();
                best_f = labeled_f.clone();
                best_y = labeled_y.clone();
                stale = 0;
            }
            (Some(_), Some(_)) => {
                stale += 1;
                if stale >= config.patience {
                    break;
                }
            }
            (Some(v), None) => {
                best_loss = Some(v);
                best_model = model.clone();
                best_f = labeled_f.clone();
                best_y = labeled_y.clone();
            }
            (None, _) => {
                // no validation signal: keep the latest model
                best_model = model.clone();
                best_f = labeled_f.clone();
                best_y = labeled_y.clone();
            }
        }
    }

    Ok(SelfTrainOutcome {
        model: best_model,
        records,
        final_features: best_f,
        final_labels: best_y,
    })
}

/// Mean pairwise embedding distance of the selected pseudo-samples, per
/// class; `None` when a class has fewer than 2 selections.
pub fn selection_diversity(records: &[IterationRecord]) -> [Option<f64>; 2] {
    let mut per_class: [Vec<&Vec<f64>>; 2] = [Vec::new(), Vec::new()];
    for rec in records {
        for (label, emb) in rec.added_labels.iter().zip(&rec.added_embeddings) {
            per_class[*label as usize].push(emb);
        }
    }
    per_class.map(|embeddings| {
        let n = embeddings.len();
        if n < 2 {
            return None;
        }
        let mut total = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                total += embeddings[i]
                    .iter()
                    .zip(embeddings[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
            }
        }
        Some(total / (n * (n - 1) / 2) as f64)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn pl(index: usize, confidence: f64, embedding: [f64; 2]) -> PseudoLabel {
        PseudoLabel {
            sample_index: index,
            predicted_label: crate::pseudolabel::classify(confidence),
            confidence,
            embedding: embedding.to_vec(),
        }
    }

    #[test]
    fn st_ranks_by_confidence() {
        let pool = vec![
            pl(0, 0.99, [0.1, 0.1]),
            pl(1, 0.97, [0.2, 0.2]),
            pl(2, 0.6, [0.3, 0.3]),
        ];
        let picked = select_st(&pool, 2, 0.9);
        assert_eq!(
            picked.iter().map(|l| l.sample_index).collect::<Vec<_>>(),
            vec![0, 1]
        );
    }

    #[test]
    fn st_symmetric_score() {
        // class-0 prediction with confidence 0.01 scores 0.99
        let pool = vec![pl(0, 0.01, [0.5, 0.5])];
        let picked = select_st(&pool, 2, 0.9);
        assert_eq!(picked.len(), 1);
        assert_eq!(picked[0].predicted_label, 0);
    }

    #[test]
    fn st_empty_below_threshold() {
        let pool = vec![pl(0, 0.6, [0.5, 0.5]), pl(1, 0.4, [0.5, 0.5])];
        assert!(select_st(&pool, 2, 0.9).is_empty());
    }

    #[test]
    fn dst_balanced_when_both_classes_rich() {
        let mut pool = Vec::new();
        for i in 0..20 {
            let conf = if i % 2 == 0 { 0.95 } else { 0.05 };
            pool.push(pl(i, conf, [i as f64 / 20.0, 0.5]));
        }
        let (picked, attempts) = select_dst(&pool, 6, 0.9, 2, 300, RngSeed(1));
        assert_eq!(picked.len(), 6);
        let pos = picked.iter().filter(|l| l.predicted_label == 1).count();
        assert_eq!(pos, 3);
        assert!(attempts >= 6);
        let unique: std::collections::HashSet<_> =
            picked.iter().map(|l| l.sample_index).collect();
        assert_eq!(unique.len(), 6);
    }

    #[test]
    fn dst_single_class_pool_collapses_to_empty() {
        let pool: Vec<PseudoLabel> = (0..5).map(|i| pl(i, 0.95, [0.5, 0.5])).collect();
        let (picked, attempts) = select_dst(&pool, 4, 0.9, 2, 200, RngSeed(2));
        assert!(picked.is_empty());
        assert_eq!(attempts, 200);
    }

    #[test]
    fn dst_nearest_of_one_always_accepted() {
        // one candidate per class, both above the threshold: every probe hits
        // the same nearest sample, so the pair is picked for any seed
        for seed in 0..100 {
            let pool = vec![pl(0, 0.95, [0.5, 0.5]), pl(1, 0.05, [0.2, 0.8])];
            let (picked, _) = select_dst(&pool, 2, 0.9, 2, 100, RngSeed(seed));
            assert_eq!(picked.len(), 2, "seed {seed}");
            assert_eq!(picked[0].sample_index, 0);
            assert_eq!(picked[1].sample_index, 1);
        }
    }

    #[test]
    fn dst_rejects_below_threshold() {
        let pool = vec![pl(0, 0.8, [0.5, 0.5]), pl(1, 0.2, [0.4, 0.4])];
        let (picked, attempts) = select_dst(&pool, 2, 0.9, 2, 50, RngSeed(3));
        assert!(picked.is_empty());
        assert_eq!(attempts, 50);
    }

    #[test]
    fn default_p_examples() {
        assert_eq!(default_p(100).unwrap(), 10);
        assert_eq!(default_p(200).unwrap(), 14);
        assert_eq!(default_p(60).unwrap(), 6);
        assert_eq!(default_p(4).unwrap(), 2);
        assert!(default_p(3).is_err());
    }

    #[test]
    fn diversity_hand_values() {
        let rec = IterationRecord {
            iteration: 1,
            added_indices: vec![0, 1],
            added_labels: vec![1, 1],
            added_confidences: vec![0.95, 0.95],
            added_embeddings: vec![vec![0.0, 0.0], vec![0.3, 0.0]],
            validation_loss: None,
            probe_attempts: 0,
        };
        let div = selection_diversity(&[rec.clone()]);
        assert!((div[1].unwrap() - 0.3).abs() < 1e-12);
        assert!(div[0].is_none());

        // three samples with pairwise distances 0.1 / 0.2 / 0.3
        let rec3 = IterationRecord {
            added_labels: vec![0, 0, 0],
            added_embeddings: vec![vec![0.0], vec![0.1], vec![0.3]],
            added_indices: vec![0, 1, 2],
            added_confidences: vec![0.1, 0.1, 0.1],
            ..rec
        };
        let div = selection_diversity(&[rec3]);
        assert!((div[0].unwrap() - 0.2).abs() < 1e-12);
    }

    fn tiny_input<'a>(
        labeled_f: &'a Array2<f64>,
        labeled_y: &'a [u8],
        pool_f: &'a Array2<f64>,
        val_f: &'a Array2<f64>,
        val_y: &'a [u8],
    ) -> SelfTrainInput<'a> {
        SelfTrainInput {
            labeled_features: labeled_f.view(),
            labeled_labels: labeled_y,
            pool_features: pool_f.view(),
            validation_features: val_f.view(),
            validation_labels: val_y,
        }
    }

    use ndarray::Array2;

    #[test]
    fn empty_pool_returns_supervised_baseline() {
        let labeled_f = array![[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]];
        let labeled_y = [0u8, 0, 1, 1];
        let pool = Array2::zeros((0, 2));
        let val = Array2::zeros((0, 2));
        let model_cfg = TrainConfig {
            max_epochs: 10,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let st_cfg = SelfTrainConfig {
            p: 2,
            ..SelfTrainConfig::default()
        };
        let input = tiny_input(&labeled_f, &labeled_y, &pool, &val, &[]);
        let out = run_self_training(&input, &model_cfg, &st_cfg).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.final_labels, labeled_y);
    }

    #[test]
    fn unattainable_threshold_stops_immediately() {
        let labeled_f = array![[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]];
        let labeled_y = [0u8, 0, 1, 1];
        let pool = array![[0.05, 0.0], [5.05, 5.0]];
        let val = Array2::zeros((0, 2));
        let model_cfg = TrainConfig {
            max_epochs: 10,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let st_cfg = SelfTrainConfig {
            p: 2,
            mu: 1.0 - 1e-12,
            ..SelfTrainConfig::default()
        };
        let input = tiny_input(&labeled_f, &labeled_y, &pool, &val, &[]);
        let out = run_self_training(&input, &model_cfg, &st_cfg).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.final_labels.len(), 4);
    }

    #[test]
    fn loop_bookkeeping_invariants() {
        // small separable problem; the loop must conserve samples and grow
        // the labeled set monotonically by at most p per iteration
        let mut rng = RngSeed(21).rng();
        let make = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| {
            let mut f = Array2::zeros((n, 2));
            let mut y = Vec::new();
            for i in 0..n {
                let class = (i % 2) as u8;
                let c = if class == 0 { 0.0 } else { 4.0 };
                f[[i, 0]] = c + rng.gen_range(-0.5..0.5);
                f[[i, 1]] = rng.gen_range(-0.5..0.5);
                y.push(class);
            }
            (f, y)
        };
        let (labeled_f, labeled_y) = make(20, &mut rng);
        let (pool_f, _) = make(30, &mut rng);
        let (val_f, val_y) = make(10, &mut rng);
        let model_cfg = TrainConfig {
            max_epochs: 20,
            batch_size: 16,
            ..TrainConfig::default()
        };
        for strategy in [Strategy::St, Strategy::Dst] {
            let st_cfg = SelfTrainConfig {
                p: 4,
                mu: 0.7,
                max_iterations: 20,
                strategy,
                seed: RngSeed(9),
                ..SelfTrainConfig::default()
            };
            let input = tiny_input(&labeled_f, &labeled_y, &pool_f, &val_f, &val_y);
            let out = run_self_training(&input, &model_cfg, &st_cfg).unwrap();
            let mut seen = std::collections::HashSet::new();
            let mut labeled_size = 20;
            for rec in &out.records {
                assert!(rec.added_indices.len() <= 4);
                assert!(!rec.added_indices.is_empty());
                for &i in &rec.added_indices {
                    assert!(i < 30);
                    assert!(seen.insert(i), "pool row {i} selected twice");
                }
                labeled_size += rec.added_indices.len();
                if strategy == Strategy::Dst {
                    let pos = rec.added_labels.iter().filter(|&&y| y == 1).count();
                    assert_eq!(2 * pos, rec.added_labels.len());
                }
                if strategy == Strategy::St {
                    for c in &rec.added_confidences {
                        assert!(c.max(1.0 - c) >= 0.7);
                    }
                }
            }
            // the returned set is a prefix snapshot of the grown labeled set
            assert!(out.final_labels.len() >= 20);
            assert!(out.final_labels.len() <= labeled_size);
            assert_eq!(out.final_features.nrows(), out.final_labels.len());
        }
    }

    #[test]
    fn self_training_deterministic() {
        let labeled_f = array![
            [0.0, 0.0],
            [0.2, 0.1],
            [4.0, 4.0],
            [4.2, 4.1],
            [0.1, -0.1],
            [4.1, 3.9]
        ];
        let labeled_y = [0u8, 0, 1, 1, 0, 1];
        let pool = array![[0.05, 0.0], [4.05, 4.0], [0.15, 0.05], [4.15, 4.05]];
        let val = array![[0.0, 0.1], [4.0, 4.1]];
        let val_y = [0u8, 1];
        let model_cfg = TrainConfig {
            max_epochs: 15,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let st_cfg = SelfTrainConfig {
            p: 2,
            mu: 0.6,
            max_iterations: 5,
            seed: RngSeed(31),
            ..SelfTrainConfig::default()
        };
        let input = tiny_input(&labeled_f, &labeled_y, &pool, &val, &val_y);
        let a = run_self_training(&input, &model_cfg, &st_cfg).unwrap();
        let b = run_self_training(&input, &model_cfg, &st_cfg).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.records, b.records);
        assert_eq!(a.final_labels, b.final_labels);
    }
}
