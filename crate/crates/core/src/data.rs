//! Shared domain types: the dataset carrier, split bookkeeping and the
//! deterministic RNG contract used by every stochastic operation.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed for the experiment-wide RNG stream.
///
/// Identical seed + identical inputs must give bit-identical outputs for
/// every stochastic operation in the repository. Sub-streams are forked by
/// tag so fold results do not depend on execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Derives an independent child seed. Uses splitmix64 finalization so
    /// nearby tags map to uncorrelated streams.
    pub fn fork(self, tag: u64) -> RngSeed {
        let mut z = self.0 ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        RngSeed(z ^ (z >> 31))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Feature matrix plus optional binary labels and sample identifiers; the
/// universal data carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Option<Vec<u8>>,
    ids: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        labels: Option<Vec<u8>>,
        ids: Option<Vec<String>>,
    ) -> Result<Dataset> {
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite feature value".into()));
        }
        if let Some(l) = &labels {
            if l.len() != features.nrows() {
                return Err(Error::InvalidData(format!(
                    "label count {} != sample count {}",
                    l.len(),
                    features.nrows()
                )));
            }
            if let Some(bad) = l.iter().find(|&&y| y > 1) {
                return Err(Error::InvalidData(format!("non-binary label {bad}")));
            }
        }
        if let Some(ids) = &ids {
            if ids.len() != features.nrows() {
                return Err(Error::InvalidData(format!(
                    "id count {} != sample count {}",
                    ids.len(),
                    features.nrows()
                )));
            }
        }
        Ok(Dataset {
            features,
            labels,
            ids,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    /// Identifier for row `i`; auto-assigns "s{row}" when ids are absent.
    pub fn id_of(&self, i: usize) -> String {
        match &self.ids {
            Some(ids) => ids[i].clone(),
            None => format!("s{i}"),
        }
    }

    /// Labels or an error when the dataset is unlabeled.
    pub fn require_labels(&self) -> Result<&[u8]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::InvalidData("dataset has no labels".into()))
    }

    /// Feature rows for the given indices, in the given order.
    pub fn select_features(&self, indices: &[usize]) -> Array2<f64> {
        let mut out = Array2::zeros((indices.len(), self.n_features()));
        for (r, &i) in indices.iter().enumerate() {
            out.row_mut(r).assign(&self.features.row(i));
        }
        out
    }

    pub fn select_labels(&self, indices: &[usize]) -> Result<Vec<u8>> {
        let labels = self.require_labels()?;
        Ok(indices.iter().map(|&i| labels[i]).collect())
    }
}

/// Row-index bookkeeping for one cross-validation fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub labeled: Vec<usize>,
    pub unlabeled: Vec<usize>,
    pub validation: Option<Vec<usize>>,
}

fn indices_by_class(labels: &[u8], indices: &[usize]) -> [Vec<usize>; 2] {
    let mut by_class = [Vec::new(), Vec::new()];
    for &i in indices {
        by_class[labels[i] as usize].push(i);
    }
    by_class
}

/// Stratified k-fold split: every sample appears in exactly one test fold
/// and per-fold class proportions match the global ones within one sample.
pub fn stratified_kfold(
    dataset: &Dataset,
    n_folds: usize,
    seed: RngSeed,
) -> Result<Vec<SplitIndices>> {
    if n_folds < 2 {
        return Err(Error::InvalidArgument("n_folds must be >= 2".into()));
    }
    let labels = dataset.require_labels()?;
    let all: Vec<usize> = (0..dataset.n_samples()).collect();
    let by_class = indices_by_class(labels, &all);
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < n_folds {
            return Err(Error::ClassTooSmall {
                class: c as u8,
                available: members.len(),
                needed: n_folds,
            });
        }
    }

    let mut rng = seed.rng();
    let mut test_folds: Vec<Vec<usize>> = vec![Vec::new(); n_folds];
    for members in &by_class {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        for (pos, idx) in shuffled.into_iter().enumerate() {
            test_folds[pos % n_folds].push(idx);
        }
    }

    let splits = test_folds
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let in_test: std::collections::HashSet<usize> = test.iter().copied().collect();
            let train: Vec<usize> = (0..dataset.n_samples())
                .filter(|i| !in_test.contains(i))
                .collect();
            SplitIndices {
                train,
                test,
                labeled: Vec::new(),
                unlabeled: Vec::new(),
                validation: None,
            }
        })
        .collect();
    Ok(splits)
}

/// Per-class quotas by largest-remainder rounding; sums exactly to `total`.
pub(crate) fn largest_remainder_quotas(counts: &[usize], total: usize) -> Vec<usize> {
    let sum: usize = counts.iter().sum();
    assert!(total <= sum);
    let exact: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 * total as f64 / sum as f64)
        .collect();
    let mut quotas: Vec<usize> = exact.iter().map(|&e| e.floor() as usize).collect();
    let mut assigned: usize = quotas.iter().sum();
    // distribute the remainder by descending fractional part, lower class first on ties
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let mut k = 0;
    while assigned < total {
        let c = order[k % counts.len()];
        if quotas[c] < counts[c] {
            quotas[c] += 1;
            assigned += 1;
        }
        k += 1;
    }
    quotas
}

/// Splits train indices into a stratified labeled subset and its unlabeled
/// complement. `|labeled| = round(labeled_fraction * |train|)`.
pub fn labeled_unlabeled_split(
    train_indices: &[usize],
    labeled_fraction: f64,
    dataset: &Dataset,
    seed: RngSeed,
) -> Result<SplitIndices> {
    if train_indices.is_empty() {
        return Err(Error::InvalidArgument("train indices empty".into()));
    }
    if !(labeled_fraction > 0.0 && labeled_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "labeled fraction {labeled_fraction} must lie in (0, 1)"
        )));
    }
    let labels = dataset.require_labels()?;
    let by_class = indices_by_class(labels, train_indices);
    let counts = [by_class[0].len(), by_class[1].len()];
    let target = (labeled_fraction * train_indices.len() as f64).round() as usize;
    let quotas = largest_remainder_quotas(&counts, target);
    for (c, (&q, members)) in quotas.iter().zip(&by_class).enumerate() {
        if q == 0 && !members.is_empty() {
            return Err(Error::ClassTooSmall {
                class: c as u8,
                available: members.len(),
                needed: 1,
            });
        }
    }

    let mut rng = seed.rng();
    let mut labeled = Vec::with_capacity(target);
    for (members, &q) in by_class.iter().zip(&quotas) {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        labeled.extend_from_slice(&shuffled[..q]);
    }
    labeled.sort_unstable();
    let in_labeled: std::collections::HashSet<usize> = labeled.iter().copied().collect();
    let unlabeled: Vec<usize> = train_indices
        .iter()
        .copied()
        .filter(|i| !in_labeled.contains(i))
        .collect();
    Ok(SplitIndices {
        train: train_indices.to_vec(),
        test: Vec::new(),
        labeled,
        unlabeled,
        validation: None,
    })
}

/// Undersamples the majority class so both classes have
/// `min(class counts)` members; minority indices are all retained.
pub fn undersample_to_balance(
    dataset: &Dataset,
    indices: &[usize],
    seed: RngSeed,
) -> Result<Vec<usize>> {
    let labels = dataset.require_labels()?;
    let by_class = indices_by_class(labels, indices);
    if by_class[0].is_empty() || by_class[1].is_empty() {
        return Err(Error::SingleClass);
    }
    let keep = by_class[0].len().min(by_class[1].len());
    let mut rng = seed.rng();
    let mut out = Vec::with_capacity(2 * keep);
    for members in &by_class {
        if members.len() == keep {
            out.extend_from_slice(members);
        } else {
            let mut shuffled = members.clone();
            shuffled.shuffle(&mut rng);
            out.extend_from_slice(&shuffled[..keep]);
        }
    }
    out.sort_unstable();
    Ok(out)
}
