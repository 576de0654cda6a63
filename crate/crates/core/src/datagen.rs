//! Synthetic benchmark data: the 2-D interleaving moons dataset and
//! n-dimensional hypercube-cluster classification datasets.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, RngSeed};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoonsSpec {
    pub n_samples: usize,
    pub noise_stddev: f64,
    pub seed: RngSeed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypercubeSpec {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_informative: usize,
    pub clusters_per_class: usize,
    pub hypercube_side: f64,
    pub cluster_stddev: f64,
    pub seed: RngSeed,
}

impl HypercubeSpec {
    /// Paper-style defaults: two clusters per class around the vertices of a
    /// side-3 hypercube with unit-stddev Gaussian clusters.
    pub fn new(n_samples: usize, n_features: usize, n_informative: usize, seed: RngSeed) -> Self {
        HypercubeSpec {
            n_samples,
            n_features,
            n_informative,
            clusters_per_class: 2,
            hypercube_side: 3.0,
            cluster_stddev: 1.0,
            seed,
        }
    }
}

/// Rounds `fraction * n` to the nearest integer, used for the
/// "80% informative" feature counts (13/16, 26/32, 51/64, 102/128).
pub fn informative_count(n_features: usize, fraction: f64) -> usize {
    (fraction * n_features as f64).round() as usize
}

/// Two interleaving half circles with isotropic Gaussian noise.
///
/// Class 0 sits on the upper unit arc centered at the origin; class 1 on the
/// lower arc shifted by (+1, +0.5) and reflected.
pub fn generate_moons(spec: &MoonsSpec) -> Result<Dataset> {
    if spec.n_samples == 0 || spec.n_samples % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "moons n_samples {} must be positive and even",
            spec.n_samples
        )));
    }
    if spec.noise_stddev < 0.0 {
        return Err(Error::InvalidArgument("negative noise stddev".into()));
    }
    let per_class = spec.n_samples / 2;
    let mut rng = spec.seed.rng();
    let noise = Normal::new(0.0, spec.noise_stddev.max(f64::MIN_POSITIVE)).unwrap();
    let mut features = Array2::zeros((spec.n_samples, 2));
    let mut labels = Vec::with_capacity(spec.n_samples);
    for i in 0..per_class {
        let t = if per_class == 1 {
            0.0
        } else {
            std::f64::consts::PI * i as f64 / (per_class - 1) as f64
        };
        features[[i, 0]] = t.cos();
        features[[i, 1]] = t.sin();
        labels.push(0u8);
        features[[per_class + i, 0]] = 1.0 - t.cos();
        features[[per_class + i, 1]] = 0.5 - t.sin();
    }
    labels.extend(std::iter::repeat(1u8).take(per_class));
    if spec.noise_stddev > 0.0 {
        for v in features.iter_mut() {
            *v += noise.sample(&mut rng);
        }
    }
    Dataset::new(features, Some(labels), None)
}

/// Gaussian clusters around randomly chosen hypercube vertices, two clusters
/// assigned per class, with the trailing `n_features - n_informative` columns
/// generated as fixed linear combinations of the informative ones.
pub fn generate_hypercube(spec: &HypercubeSpec) -> Result<Dataset> {
    let f = spec.n_informative;
    if f == 0 || f > spec.n_features {
        return Err(Error::InvalidArgument(format!(
            "n_informative {} must lie in 1..=n_features {}",
            f, spec.n_features
        )));
    }
    let n_clusters = 2 * spec.clusters_per_class;
    if spec.clusters_per_class == 0 || (f < 64 && n_clusters > 1usize << f) {
        return Err(Error::InvalidArgument(format!(
            "{n_clusters} clusters need {n_clusters} distinct vertices of a {f}-dimensional hypercube"
        )));
    }
    if spec.n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }

    let mut rng = spec.seed.rng();
    let half = spec.hypercube_side / 2.0;

    // distinct vertices as sign masks over the informative dimensions
    let mut masks: Vec<Vec<bool>> = Vec::with_capacity(n_clusters);
    while masks.len() < n_clusters {
        let mask: Vec<bool> = (0..f).map(|_| rng.gen::<bool>()).collect();
        if !masks.contains(&mask) {
            masks.push(mask);
        }
    }
    // random cluster-to-class assignment: first half of the permutation -> class 0
    masks.shuffle(&mut rng);

    let n_pos = spec.n_samples / 2;
    let n_neg = spec.n_samples - n_pos;
    let class_sizes = [n_neg, n_pos];
    let normal = Normal::new(0.0, spec.cluster_stddev).unwrap();

    let mut informative = Array2::zeros((spec.n_samples, f));
    let mut labels = Vec::with_capacity(spec.n_samples);
    let mut row = 0;
    for class in 0..2u8 {
        let clusters =
            &masks[class as usize * spec.clusters_per_class..][..spec.clusters_per_class];
        for s in 0..class_sizes[class as usize] {
            let mask = &clusters[s % spec.clusters_per_class];
            for (j, &positive) in mask.iter().enumerate() {
                let center = if positive { half } else { -half };
                informative[[row, j]] = center + normal.sample(&mut rng);
            }
            labels.push(class);
            row += 1;
        }
    }

    // redundant columns: dense Gaussian mix of the informative ones
    let n_redundant = spec.n_features - f;
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    let mix = Array2::from_shape_fn((f, n_redundant), |_| std_normal.sample(&mut rng));
    let redundant = informative.dot(&mix);

    let mut features = Array2::zeros((spec.n_samples, spec.n_features));
    features
        .slice_mut(ndarray::s![.., ..f])
        .assign(&informative);
    if n_redundant > 0 {
        features
            .slice_mut(ndarray::s![.., f..])
            .assign(&redundant);
    }

    // shuffle rows so class blocks do not stay contiguous
    let mut order: Vec<usize> = (0..spec.n_samples).collect();
    order.shuffle(&mut rng);
    let mut shuffled = Array2::zeros(features.raw_dim());
    let mut shuffled_labels = vec![0u8; spec.n_samples];
    for (r, &src) in order.iter().enumerate() {
        shuffled.row_mut(r).assign(&features.row(src));
        shuffled_labels[r] = labels[src];
    }
    Dataset::new(shuffled, Some(shuffled_labels), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::s;

    #[test]
    fn moons_zero_noise_on_arcs() {
        let ds = generate_moons(&MoonsSpec {
            n_samples: 4,
            noise_stddev: 0.0,
            seed: RngSeed(0),
        })
        .unwrap();
        let labels = ds.labels().unwrap();
        for i in 0..4 {
            let x = ds.features()[[i, 0]];
            let y = ds.features()[[i, 1]];
            let dist = if labels[i] == 0 {
                ((x * x + y * y).sqrt() - 1.0).abs()
            } else {
                let dx = x - 1.0;
                let dy = y - 0.5;
                ((dx * dx + dy * dy).sqrt() - 1.0).abs()
            };
            assert!(dist < 1e-12, "point {i} off its arc by {dist}");
        }
    }

    #[test]
    fn moons_balanced_and_bounded() {
        for seed in 0..10 {
            let ds = generate_moons(&MoonsSpec {
                n_samples: 2000,
                noise_stddev: 0.1,
                seed: RngSeed(seed),
            })
            .unwrap();
            let labels = ds.labels().unwrap();
            assert_eq!(labels.iter().filter(|&&y| y == 1).count(), 1000);
            let inside = (0..2000)
                .filter(|&i| {
                    let x = ds.features()[[i, 0]];
                    let y = ds.features()[[i, 1]];
                    (-1.5..=2.5).contains(&x) && (-1.0..=1.5).contains(&y)
                })
                .count();
            // > 0.999 per point; allow a couple of outliers per draw
            assert!(inside >= 1995, "only {inside} of 2000 in the box");
        }
    }

    #[test]
    fn moons_rejects_odd() {
        assert!(generate_moons(&MoonsSpec {
            n_samples: 5,
            noise_stddev: 0.1,
            seed: RngSeed(0),
        })
        .is_err());
    }

    #[test]
    fn moons_deterministic() {
        let spec = MoonsSpec {
            n_samples: 200,
            noise_stddev: 0.1,
            seed: RngSeed(77),
        };
        assert_eq!(generate_moons(&spec).unwrap(), generate_moons(&spec).unwrap());
    }

    /// Least-squares residual of regressing each redundant column on the
    /// informative block; the oracle for linear dependence.
    fn max_regression_residual(ds: &Dataset, f: usize) -> f64 {
        let x = ds.features().slice(s![.., ..f]).to_owned();
        let xtx = x.t().dot(&x);
        let n = f;
        // solve via Gaussian elimination with partial pivoting
        let solve = |b: ndarray::Array1<f64>| -> ndarray::Array1<f64> {
            let mut a = xtx.clone();
            let mut b = b;
            for col in 0..n {
                let piv = (col..n)
                    .max_by(|&r, &s| a[[r, col]].abs().partial_cmp(&a[[s, col]].abs()).unwrap())
                    .unwrap();
                if piv != col {
                    for j in 0..n {
                        a.swap([piv, j], [col, j]);
                    }
                    b.swap(piv, col);
                }
                for r in col + 1..n {
                    let m = a[[r, col]] / a[[col, col]];
                    for j in col..n {
                        a[[r, j]] -= m * a[[col, j]];
                    }
                    b[r] -= m * b[col];
                }
            }
            let mut sol = ndarray::Array1::zeros(n);
            for col in (0..n).rev() {
                let mut acc = b[col];
                for j in col + 1..n {
                    acc -= a[[col, j]] * sol[j];
                }
                sol[col] = acc / a[[col, col]];
            }
            sol
        };
        let mut worst: f64 = 0.0;
        for j in f..ds.n_features() {
            let y = ds.features().column(j).to_owned();
            let beta = solve(x.t().dot(&y));
            let fitted = x.dot(&beta);
            let resid = (&y - &fitted).iter().map(|r| r * r).sum::<f64>().sqrt()
                / y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            worst = worst.max(resid);
        }
        worst
    }

    #[test]
    fn hypercube_redundant_columns_linear() {
        let ds = generate_hypercube(&HypercubeSpec::new(400, 16, 13, RngSeed(4))).unwrap();
        assert!(max_regression_residual(&ds, 13) < 1e-9);
    }

    #[test]
    fn hypercube_all_informative() {
        let ds = generate_hypercube(&HypercubeSpec::new(200, 16, 16, RngSeed(1))).unwrap();
        assert_eq!(ds.n_features(), 16);
        let labels = ds.labels().unwrap();
        let pos = labels.iter().filter(|&&y| y == 1).count();
        assert_eq!(pos, 100);
    }

    #[test]
    fn hypercube_four_square_vertices() {
        let ds = generate_hypercube(&HypercubeSpec {
            n_samples: 400,
            n_features: 2,
            n_informative: 2,
            clusters_per_class: 2,
            hypercube_side: 3.0,
            cluster_stddev: 0.01,
            seed: RngSeed(8),
        })
        .unwrap();
        // with tiny spread, rounding each point to the nearest vertex must
        // recover exactly 4 distinct centers
        let mut centers = std::collections::HashSet::new();
        for i in 0..400 {
            let cx = if ds.features()[[i, 0]] > 0.0 { 1 } else { -1 };
            let cy = if ds.features()[[i, 1]] > 0.0 { 1 } else { -1 };
            centers.insert((cx, cy));
        }
        assert_eq!(centers.len(), 4);
    }

    #[test]
    fn hypercube_insufficient_vertices() {
        assert!(generate_hypercube(&HypercubeSpec {
            n_samples: 10,
            n_features: 2,
            n_informative: 1,
            clusters_per_class: 2,
            hypercube_side: 3.0,
            cluster_stddev: 1.0,
            seed: RngSeed(0),
        })
        .is_err());
    }

    #[test]
    fn hypercube_deterministic() {
        let spec = HypercubeSpec::new(100, 8, 6, RngSeed(33));
        assert_eq!(
            generate_hypercube(&spec).unwrap(),
            generate_hypercube(&spec).unwrap()
        );
    }

    #[test]
    fn informative_fraction_rounding() {
        assert_eq!(informative_count(16, 0.8), 13);
        assert_eq!(informative_count(32, 0.8), 26);
        assert_eq!(informative_count(64, 0.8), 51);
        assert_eq!(informative_count(128, 0.8), 102);
    }
}
