//! The metric-learning model: a two-layer feed-forward transformation into
//! the bounded latent space [0,1]^out_dim, trained with the pairwise
//! contrastive loss by mini-batch gradient descent with hand-derived
//! backpropagation.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::RngSeed;
use crate::error::{Error, Result};

pub const DEFAULT_HIDDEN_DIM: usize = 8;
pub const DEFAULT_OUT_DIM: usize = 2;

/// Guards the pair distance against an undefined gradient at d = 0.
const DISTANCE_SMOOTHING: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingModel {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub m_pos: f64,
    pub m_neg: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub hidden_dim: usize,
    pub out_dim: usize,
    pub seed: RngSeed,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 64,
            m_pos: 0.25,
            m_neg: 1.0,
            learning_rate: 1e-3,
            max_epochs: 100,
            patience: 10,
            hidden_dim: DEFAULT_HIDDEN_DIM,
            out_dim: DEFAULT_OUT_DIM,
            seed: RngSeed(0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::InvalidArgument("batch_size must be >= 2".into()));
        }
        if !(self.m_pos >= 0.0 && self.m_neg > self.m_pos) {
            return Err(Error::InvalidArgument(format!(
                "margins must satisfy 0 <= m_pos < m_neg, got {} / {}",
                self.m_pos, self.m_neg
            )));
        }
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument("invalid learning rate".into()));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::InvalidArgument(
                "max_epochs and patience must be positive".into(),
            ));
        }
        if self.hidden_dim == 0 || self.out_dim == 0 {
            return Err(Error::InvalidArgument("zero layer width".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

fn sigmoid(x: f64) -> f64 {
    let v = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    // keep saturated outputs strictly inside (0,1)
    v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

impl EmbeddingModel {
    pub fn zeros(n_features: usize, hidden_dim: usize, out_dim: usize) -> EmbeddingModel {
        EmbeddingModel {
            w1: Array2::zeros((n_features, hidden_dim)),
            b1: Array1::zeros(hidden_dim),
            w2: Array2::zeros((hidden_dim, out_dim)),
            b2: Array1::zeros(out_dim),
        }
    }

    /// Glorot-uniform initialization: weights uniform in
    /// +-sqrt(6/(fan_in+fan_out)), biases zero.
    pub fn init(n_features: usize, hidden_dim: usize, out_dim: usize, seed: RngSeed) -> Self {
        let mut rng = seed.rng();
        let mut layer = |fan_in: usize, fan_out: usize| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            Array2::from_shape_fn((fan_in, fan_out), |_| rng.gen_range(-bound..bound))
        };
        let w1 = layer(n_features, hidden_dim);
        let w2 = layer(hidden_dim, out_dim);
        EmbeddingModel {
            w1,
            b1: Array1::zeros(hidden_dim),
            w2,
            b2: Array1::zeros(out_dim),
        }
    }

    pub fn n_features(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.w2.ncols()
    }

    /// Forward pass: `sigmoid(w2' * relu(w1' * x + b1) + b2)` per row.
    /// Every output coordinate lies strictly inside (0, 1).
    pub fn embed(&self, features: ArrayView2<f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.n_features() {
            return Err(Error::InvalidArgument(format!(
                "feature width {} != model input width {}",
                features.ncols(),
                self.n_features()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite input to embed".into()));
        }
        let mut hidden = features.dot(&self.w1) + &self.b1;
        hidden.mapv_inplace(|v| v.max(0.0));
        let mut out = hidden.dot(&self.w2) + &self.b2;
        out.mapv_inplace(sigmoid);
        Ok(out)
    }

    pub fn embed_one(&self, features: ArrayView1<f64>) -> Result<Array1<f64>> {
        let row = features.insert_axis(Axis(0));
        Ok(self.embed(row)?.row(0).to_owned())
    }
}

fn pair_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (sq + DISTANCE_SMOOTHING).sqrt()
}

/// Pairwise contrastive loss over all unordered pairs in the batch:
/// same-class pairs pay `max(0, d - m_pos)`, cross-class pairs pay
/// `max(0, m_neg - d)`.
pub fn contrastive_loss(
    embeddings: ArrayView2<f64>,
    labels: &[u8],
    m_pos: f64,
    m_neg: f64,
) -> f64 {
    let n = embeddings.nrows();
    assert_eq!(n, labels.len());
    let mut loss = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = pair_distance(embeddings.row(i), embeddings.row(j));
            if labels[i] == labels[j] {
                loss += (d - m_pos).max(0.0);
            } else {
                loss += (m_neg - d).max(0.0);
            }
        }
    }
    loss
}

/// Mean contrastive loss per pair; `None` when fewer than 2 rows.
pub fn mean_contrastive_loss(
    embeddings: ArrayView2<f64>,
    labels: &[u8],
    m_pos: f64,
    m_neg: f64,
) -> Option<f64> {
    let n = embeddings.nrows();
    if n < 2 {
        return None;
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Some(contrastive_loss(embeddings, labels, m_pos, m_neg) / pairs)
}

/// Analytical gradients of the batch contrastive loss for all parameters.
/// Hinge terms exactly at the margin use subgradient 0.
pub fn loss_gradient(
    model: &EmbeddingModel,
    features: ArrayView2<f64>,
    labels: &[u8],
    m_pos: f64,
    m_neg: f64,
) -> Result<(f64, Gradients)> {
    let n = features.nrows();
    if n < 2 {
        return Err(Error::InvalidArgument("batch needs at least 2 rows".into()));
    }
    // forward with caches
    let mut hidden_pre = features.dot(&model.w1) + &model.b1;
    let hidden = hidden_pre.mapv(|v| v.max(0.0));
    let out_pre = hidden.dot(&model.w2) + &model.b2;
    let z = out_pre.mapv(sigmoid);

    // dL/dz accumulated over all active pairs
    let mut loss = 0.0;
    let mut dz: Array2<f64> = Array2::zeros(z.raw_dim());
    for i in 0..n {
        for j in i + 1..n {
            let d = pair_distance(z.row(i), z.row(j));
            let same = labels[i] == labels[j];
            let coef = if same {
                loss += (d - m_pos).max(0.0);
                if d > m_pos {
                    1.0
                } else {
                    0.0
                }
            } else {
                loss += (m_neg - d).max(0.0);
                if d < m_neg {
                    -1.0
                } else {
                    0.0
                }
            };
            if coef != 0.0 {
                for c in 0..z.ncols() {
                    let g = coef * (z[[i, c]] - z[[j, c]]) / d;
                    dz[[i, c]] += g;
                    dz[[j, c]] -= g;
                }
            }
        }
    }

    // backprop through sigmoid, the output layer, relu and the hidden layer
    let dout_pre = &dz * &z.mapv(|s| s * (1.0 - s));
    let gw2 = hidden.t().dot(&dout_pre);
    let gb2 = dout_pre.sum_axis(Axis(0));
    let dhidden = dout_pre.dot(&model.w2.t());
    hidden_pre.mapv_inplace(|v| if v > 0.0 { 1.0 } else { 0.0 });
    let dhidden_pre = &dhidden * &hidden_pre;
    let gw1 = features.t().dot(&dhidden_pre);
    let gb1 = dhidden_pre.sum_axis(Axis(0));

    Ok((
        loss,
        Gradients {
            w1: gw1,
            b1: gb1,
            w2: gw2,
            b2: gb2,
        },
    ))
}

/// Adaptive-moment gradient descent state for one parameter tensor.
struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    fn new(len: usize) -> AdamState {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    fn step<'a>(
        &mut self,
        params: impl Iterator<Item = &'a mut f64>,
        grads: impl Iterator<Item = &'a f64>,
        lr: f64,
        t: usize,
    ) {
        let bc1 = 1.0 - ADAM_BETA1.powi(t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(t as i32);
        for ((p, &g), (m, v)) in params
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
}

/// Minimum epoch-loss improvement counted as progress by the plateau stop.
const PLATEAU_MIN_DELTA: f64 = 1e-6;

/// Mini-batch training: shuffles every epoch, computes the contrastive loss
/// over all within-batch pairs, and updates the parameters with
/// adaptive-moment steps. Stops at `max_epochs` or when the epoch mean loss
/// fails to improve for `patience` consecutive epochs.
///
/// Returns the trained model and the per-epoch mean loss trace.
pub fn train(
    model: &EmbeddingModel,
    features: ArrayView2<f64>,
    labels: &[u8],
    config: &TrainConfig,
) -> Result<(EmbeddingModel, Vec<f64>)> {
    config.validate()?;
    if features.nrows() != labels.len() {
        return Err(Error::InvalidArgument("features/labels length mismatch".into()));
    }
    let has = |c: u8| labels.iter().any(|&y| y == c);
    if !(has(0) && has(1)) {
        return Err(Error::SingleClass);
    }

    let mut model = model.clone();
    let mut rng = config.seed.rng();
    let mut order: Vec<usize> = (0..features.nrows()).collect();
    let mut adam_w1 = AdamState::new(model.w1.len());
    let mut adam_b1 = AdamState::new(model.b1.len());
    let mut adam_w2 = AdamState::new(model.w2.len());
    let mut adam_b2 = AdamState::new(model.b2.len());
    let mut step = 0usize;

    let mut trace = Vec::new();
    let mut best = f64::INFINITY;
    let mut stale = 0usize;

    for _epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            if batch.len() < 2 {
                continue;
            }
            let batch_features = {
                let mut m = Array2::zeros((batch.len(), features.ncols()));
                for (r, &i) in batch.iter().enumerate() {
                    m.row_mut(r).assign(&features.row(i));
                }
                m
            };
            let batch_labels: Vec<u8> = batch.iter().map(|&i| labels[i]).collect();
            let (_, grads) = loss_gradient(
                &model,
                batch_features.view(),
                &batch_labels,
                config.m_pos,
                config.m_neg,
            )?;
            step += 1;
            adam_w1.step(model.w1.iter_mut(), grads.w1.iter(), config.learning_rate, step);
            adam_b1.step(model.b1.iter_mut(), grads.b1.iter(), config.learning_rate, step);
            adam_w2.step(model.w2.iter_mut(), grads.w2.iter(), config.learning_rate, step);
            adam_b2.step(model.b2.iter_mut(), grads.b2.iter(), config.learning_rate, step);
        }
        // epoch loss over all pairs of the full training set, so the trace
        // is a function of the model alone
        let z = model.embed(features)?;
        let mean_loss =
            mean_contrastive_loss(z.view(), labels, config.m_pos, config.m_neg).unwrap_or(0.0);
        trace.push(mean_loss);
        if best - mean_loss >= PLATEAU_MIN_DELTA {
            best = mean_loss;
            stale = 0;
        } else {
            best = best.min(mean_loss);
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    Ok((model, trace))
}
