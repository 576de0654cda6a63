//! Diversity-guided self-training (Metric-DST) with metric learning for
//! selection-bias-robust binary classification.
//!
//! The crate bundles everything needed to run desk-scale benchmark
//! experiments end to end:
//!
//! - [`data`]: the [`Dataset`](data::Dataset) carrier, split bookkeeping and
//!   the deterministic RNG contract,
//! - [`datagen`]: synthetic moons and hypercube-cluster generators,
//! - [`bias`]: delta, hierarchy and random selection-bias induction,
//! - [`embedder`]: the two-layer contrastive metric-learning model with
//!   hand-derived backpropagation,
//! - [`pseudolabel`]: weighted k-nearest-neighbor confidence and labels in
//!   the learned embedding space,
//! - [`selftrain`]: the Metric-ST / Metric-DST self-training loops,
//! - [`eval`]: AUROC/AUPRC, the Wilcoxon signed-rank test and the
//!   cross-validated benchmark protocol,
//! - [`io`]: CSV/JSON file formats for datasets, configs and results.

pub mod bias;
pub mod data;
pub mod datagen;
pub mod embedder;
pub mod error;
pub mod eval;
pub mod io;
pub mod pseudolabel;
pub mod selftrain;

pub use data::{Dataset, RngSeed, SplitIndices};
pub use error::{Error, Result};
