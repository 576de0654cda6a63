//! Selection-bias induction on a labeled candidate set: delta bias,
//! hierarchy bias, and unbiased random selection.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, RngSeed};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    Ward,
    Average,
    Complete,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaBiasSpec {
    /// Class-0 anchor point.
    pub delta_0: [f64; 2],
    /// Class-1 anchor point.
    pub delta_1: [f64; 2],
    /// Total selection size, class-balanced.
    pub n_select: usize,
    #[serde(default = "default_strength")]
    pub strength: f64,
}

fn default_strength() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyBiasSpec {
    /// Samples selected per class (k).
    pub n_select_per_class: usize,
    /// Fraction drawn from the chosen cluster (b).
    #[serde(default = "default_bias_ratio")]
    pub bias_ratio: f64,
    #[serde(default = "default_linkage")]
    pub linkage: Linkage,
    /// Standardize features over the candidates before clustering.
    #[serde(default = "default_true")]
    pub standardize: bool,
}

fn default_bias_ratio() -> f64 {
    0.9
}

fn default_linkage() -> Linkage {
    Linkage::Ward
}

fn default_true() -> bool {
    true
}

/// Declarative description of a bias-induction procedure.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BiasSpec {
    Delta(DeltaBiasSpec),
    Hierarchy(HierarchyBiasSpec),
    Random { n_select: usize },
}

impl BiasSpec {
    /// Total number of samples the spec selects.
    pub fn selection_size(&self) -> usize {
        match self {
            BiasSpec::Delta(s) => s.n_select,
            BiasSpec::Hierarchy(s) => 2 * s.n_select_per_class,
            BiasSpec::Random { n_select } => *n_select,
        }
    }

    pub fn apply(
        &self,
        dataset: &Dataset,
        candidates: &[usize],
        seed: RngSeed,
    ) -> Result<Vec<usize>> {
        match self {
            BiasSpec::Delta(s) => delta_bias_select(dataset, candidates, s, seed),
            BiasSpec::Hierarchy(s) => hierarchy_bias_select(dataset, candidates, s, seed),
            BiasSpec::Random { n_select } => random_select(candidates, dataset, *n_select, seed),
        }
    }
}

fn split_by_class(dataset: &Dataset, candidates: &[usize]) -> Result<[Vec<usize>; 2]> {
    let labels = dataset.require_labels()?;
    let mut by_class = [Vec::new(), Vec::new()];
    for &i in candidates {
        by_class[labels[i] as usize].push(i);
    }
    Ok(by_class)
}

/// Unnormalized delta-bias selection weight:
/// `exp(-strength * manhattan(x, delta))`.
pub fn delta_weight(x: [f64; 2], delta: [f64; 2], strength: f64) -> f64 {
    (-strength * ((x[0] - delta[0]).abs() + (x[1] - delta[1]).abs())).exp()
}

/// Weighted sampling without replacement by the exponential-keys method:
/// draw u uniform in (0,1], keep the m items with the largest `ln(u)/w`.
fn weighted_sample_without_replacement<R: Rng>(
    items: &[usize],
    weights: &[f64],
    m: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = items
        .iter()
        .zip(weights)
        .map(|(&item, &w)| {
            let u: f64 = 1.0 - rng.gen::<f64>();
            (u.ln() / w, item)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    keyed.truncate(m);
    keyed.into_iter().map(|(_, item)| item).collect()
}

/// Class-balanced selection favoring samples close to the per-class anchor
/// point, with probability decaying exponentially in Manhattan distance.
pub fn delta_bias_select(
    dataset: &Dataset,
    candidates: &[usize],
    spec: &DeltaBiasSpec,
    seed: RngSeed,
) -> Result<Vec<usize>> {
    if dataset.n_features() != 2 {
        return Err(Error::InvalidArgument(format!(
            "delta bias requires a 2-D dataset, got {} features",
            dataset.n_features()
        )));
    }
    if spec.n_select == 0 || spec.n_select % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "delta bias n_select {} must be positive and even",
            spec.n_select
        )));
    }
    let per_class = spec.n_select / 2;
    let by_class = split_by_class(dataset, candidates)?;
    let deltas = [spec.delta_0, spec.delta_1];
    let mut rng = seed.rng();
    let mut selected = Vec::with_capacity(spec.n_select);
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < per_class {
            return Err(Error::ClassTooSmall {
                class: class as u8,
                available: members.len(),
                needed: per_class,
            });
        }
        let weights: Vec<f64> = members
            .iter()
            .map(|&i| {
                let x = [dataset.features()[[i, 0]], dataset.features()[[i, 1]]];
                delta_weight(x, deltas[class], spec.strength)
            })
            .collect();
        selected.extend(weighted_sample_without_replacement(
            members, &weights, per_class, &mut rng,
        ));
    }
    Ok(selected)
}

/// Standardized candidate feature rows (zero mean, unit variance per column
/// over the candidates; constant columns map to zero).
fn standardized_rows(dataset: &Dataset, indices: &[usize]) -> Array2<f64> {
    let mut rows = dataset.select_features(indices);
    let n = rows.nrows() as f64;
    for mut col in rows.columns_mut() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        if std > 0.0 {
            col.mapv_inplace(|v| (v - mean) / std);
        } else {
            col.fill(0.0);
        }
    }
    rows
}

/// Bottom-up agglomerative clustering (Lance-Williams updates) stopped at
/// the first merge producing a cluster of at least `min_size` members.
/// Returns the member positions of that cluster.
pub(crate) fn agglomerate_until(points: &Array2<f64>, min_size: usize, linkage: Linkage) -> Vec<usize> {
    let n = points.nrows();
    assert!(min_size <= n);
    if min_size <= 1 {
        return vec![0];
    }
    // ward operates on squared distances, the others on plain distances
    let mut dist = vec![f64::INFINITY; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d2: f64 = points
                .row(i)
                .iter()
                .zip(points.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let d = match linkage {
                Linkage::Ward => d2,
                _ => d2.sqrt(),
            };
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let mut active: Vec<bool> = vec![true; n];
    let mut size: Vec<usize> = vec![1; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();

    loop {
        // closest active pair; ties broken by lowest indices
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if active[j] && dist[i * n + j] < best.0 {
                    best = (dist[i * n + j], i, j);
                }
            }
        }
        let (_, i, j) = best;
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let (dki, dkj, dij) = (dist[k * n + i], dist[k * n + j], dist[i * n + j]);
            let nk = size[k] as f64;
            let merged = match linkage {
                Linkage::Ward => {
                    ((ni + nk) * dki + (nj + nk) * dkj - nk * dij) / (ni + nj + nk)
                }
                Linkage::Average => (ni * dki + nj * dkj) / (ni + nj),
                Linkage::Complete => dki.max(dkj),
            };
            dist[k * n + i] = merged;
            dist[i * n + k] = merged;
        }
        active[j] = false;
        size[i] += size[j];
        let moved = std::mem::take(&mut members[j]);
        members[i].extend(moved);
        if size[i] >= min_size {
            let mut cluster = std::mem::take(&mut members[i]);
            cluster.sort_unstable();
            return cluster;
        }
    }
}

/// Per class: cluster the candidates agglomeratively until one cluster holds
/// at least k samples, then draw `round(k*b)` from that cluster and the rest
/// uniformly from the remaining candidates.
pub fn hierarchy_bias_select(
    dataset: &Dataset,
    candidates: &[usize],
    spec: &HierarchyBiasSpec,
    seed: RngSeed,
) -> Result<Vec<usize>> {
    let k = spec.n_select_per_class;
    if k == 0 {
        return Err(Error::InvalidArgument("n_select_per_class must be positive".into()));
    }
    if !(0.0..=1.0).contains(&spec.bias_ratio) {
        return Err(Error::InvalidArgument(format!(
            "bias ratio {} outside [0,1]",
            spec.bias_ratio
        )));
    }
    let by_class = split_by_class(dataset, candidates)?;
    let mut rng = seed.rng();
    let mut selected = Vec::with_capacity(2 * k);
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                class: class as u8,
                available: members.len(),
                needed: k,
            });
        }
        let points = if spec.standardize {
            standardized_rows(dataset, members)
        } else {
            dataset.select_features(members)
        };
        let cluster_pos = agglomerate_until(&points, k, spec.linkage);
        let in_cluster: Vec<usize> = cluster_pos.iter().map(|&p| members[p]).collect();
        let cluster_set: std::collections::HashSet<usize> = in_cluster.iter().copied().collect();
        let outside: Vec<usize> = members
            .iter()
            .copied()
            .filter(|i| !cluster_set.contains(i))
            .collect();

        // half-up rounding; complement by subtraction so the total is exact
        let mut n_in = ((k as f64 * spec.bias_ratio) + 0.5).floor() as usize;
        let mut n_out = k - n_in;
        if n_out > outside.len() {
            // tiny candidate pools can leave too few samples outside the cluster
            n_in += n_out - outside.len();
            n_out = outside.len();
        }

        let mut pool = in_cluster;
        pool.shuffle(&mut rng);
        selected.extend_from_slice(&pool[..n_in]);
        let mut pool = outside;
        pool.shuffle(&mut rng);
        selected.extend_from_slice(&pool[..n_out]);
    }
    Ok(selected)
}

/// Class-balanced uniform selection without replacement.
pub fn random_select(
    candidates: &[usize],
    dataset: &Dataset,
    n_select: usize,
    seed: RngSeed,
) -> Result<Vec<usize>> {
    if n_select == 0 || n_select % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "n_select {n_select} must be positive and even"
        )));
    }
    let per_class = n_select / 2;
    let by_class = split_by_class(dataset, candidates)?;
    let mut rng = seed.rng();
    let mut selected = Vec::with_capacity(n_select);
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < per_class {
            return Err(Error::ClassTooSmall {
                class: class as u8,
                available: members.len(),
                needed: per_class,
            });
        }
        let mut pool = members.clone();
        pool.shuffle(&mut rng);
        selected.extend_from_slice(&pool[..per_class]);
    }
    Ok(selected)
}
