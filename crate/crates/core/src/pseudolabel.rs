//! Weighted k-nearest-neighbor prediction in the learned embedding space:
//! confidence and hard labels for the unlabeled pool.

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::embedder::EmbeddingModel;
use crate::error::{Error, Result};

/// An unlabeled sample's predicted class, confidence and embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabel {
    /// Index into the unlabeled pool.
    pub sample_index: usize,
    pub predicted_label: u8,
    /// Class-1 probability in [0,1].
    pub confidence: f64,
    pub embedding: Vec<f64>,
}

impl PseudoLabel {
    /// Confidence in the predicted class of `class` (class 1: confidence,
    /// class 0: its complement).
    pub fn class_score(&self, class: u8) -> f64 {
        if class == 1 {
            self.confidence
        } else {
            1.0 - self.confidence
        }
    }
}

fn euclidean(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// The k nearest labeled rows by Euclidean distance, ties broken by lower
/// row index. Returns (row, distance) pairs.
fn nearest_neighbors(
    query: ArrayView1<f64>,
    labeled: ArrayView2<f64>,
    k: usize,
) -> Vec<(usize, f64)> {
    let mut dists: Vec<(usize, f64)> = (0..labeled.nrows())
        .map(|i| (i, euclidean(query, labeled.row(i))))
        .collect();
    dists.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    dists.truncate(k);
    dists
}

/// Weighted-kNN class-1 probability: each of the k nearest labeled
/// embeddings contributes `y*(1-d) + (1-y)*d` with its distance normalized
/// by the diameter of the unit hypercube, and the sum is averaged over k.
pub fn knn_confidence(
    query: ArrayView1<f64>,
    labeled_embeddings: ArrayView2<f64>,
    labeled_labels: &[u8],
    k: usize,
) -> Result<f64> {
    if k == 0 || k > labeled_embeddings.nrows() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={}",
            labeled_embeddings.nrows()
        )));
    }
    let diameter = (query.len() as f64).sqrt();
    let mut total = 0.0;
    for (row, dist) in nearest_neighbors(query, labeled_embeddings, k) {
        let d_hat = (dist / diameter).clamp(0.0, 1.0);
        total += if labeled_labels[row] == 1 {
            1.0 - d_hat
        } else {
            d_hat
        };
    }
    // clamp absorbs 1e-16-scale float drift
    Ok((total / k as f64).clamp(0.0, 1.0))
}

/// Hard label from confidence: 1 iff the class-1 probability exceeds 0.5.
pub fn classify(confidence: f64) -> u8 {
    if confidence > 0.5 {
        1
    } else {
        0
    }
}

/// Embeds the labeled set and the pool, then assigns a confidence and hard
/// label to every pool sample. Output order follows pool order.
pub fn pseudolabel_pool(
    model: &EmbeddingModel,
    labeled_features: ArrayView2<f64>,
    labeled_labels: &[u8],
    pool_features: ArrayView2<f64>,
    k: usize,
) -> Result<Vec<PseudoLabel>> {
    if pool_features.nrows() == 0 {
        return Ok(Vec::new());
    }
    if labeled_features.nrows() == 0 {
        return Err(Error::InvalidArgument("labeled set empty".into()));
    }
    let labeled_z = model.embed(labeled_features)?;
    let pool_z = model.embed(pool_features)?;
    (0..pool_z.nrows())
        .map(|i| {
            let confidence = knn_confidence(pool_z.row(i), labeled_z.view(), labeled_labels, k)?;
            Ok(PseudoLabel {
                sample_index: i,
                predicted_label: classify(confidence),
                confidence,
                embedding: pool_z.row(i).to_vec(),
            })
        })
        .collect()
}

/// Euclidean distance from a probe point to a pseudo-label's embedding.
pub fn probe_distance(probe: &[f64], label: &PseudoLabel) -> f64 {
    euclidean(
        ArrayView1::from(probe),
        ArrayView1::from(&label.embedding),
    )
}
