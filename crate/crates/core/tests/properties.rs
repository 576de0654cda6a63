//! Randomized invariant checks over the split, bias, embedding and
//! selection primitives.

use metric_dst::data::{labeled_unlabeled_split, stratified_kfold, undersample_to_balance};
use metric_dst::embedder::contrastive_loss;
use metric_dst::eval::auroc;
use metric_dst::pseudolabel::knn_confidence;
use metric_dst::selftrain::{default_p, select_st};
use metric_dst::{Dataset, RngSeed};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn balanced_dataset(n_per_class: usize, seed: u64) -> Dataset {
    use rand::Rng;
    let mut rng = RngSeed(seed).rng();
    let n = 2 * n_per_class;
    let features = Array2::from_shape_fn((n, 2), |_| rng.gen_range(-3.0..3.0));
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    Dataset::new(features, Some(labels), None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kfold_partitions_and_stratifies(n_per_class in 10usize..60, n_folds in 2usize..8, seed in 0u64..1000) {
        let ds = balanced_dataset(n_per_class, seed);
        let folds = stratified_kfold(&ds, n_folds, RngSeed(seed)).unwrap();
        prop_assert_eq!(folds.len(), n_folds);
        let mut seen = vec![0usize; ds.n_samples()];
        for split in &folds {
            for &i in &split.test {
                seen[i] += 1;
            }
            // train + test partition the dataset
            let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..ds.n_samples()).collect::<Vec<_>>());
            // per-class test counts within 1 of each other
            let labels = ds.labels().unwrap();
            let c1 = split.test.iter().filter(|&&i| labels[i] == 1).count();
            let c0 = split.test.len() - c1;
            prop_assert!(c0.abs_diff(c1) <= 1);
        }
        // every sample is in exactly one test fold
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn labeled_split_partitions_train(n_per_class in 10usize..60, frac in 0.2f64..0.8, seed in 0u64..1000) {
        let ds = balanced_dataset(n_per_class, seed);
        let train: Vec<usize> = (0..ds.n_samples()).collect();
        let split = labeled_unlabeled_split(&train, frac, &ds, RngSeed(seed)).unwrap();
        let mut all: Vec<usize> = split.labeled.iter().chain(&split.unlabeled).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, train);
        let expected = (frac * ds.n_samples() as f64).round() as usize;
        prop_assert_eq!(split.labeled.len(), expected);
    }

    #[test]
    fn undersample_balances_and_keeps_minority(n_per_class in 5usize..40, drop in 0usize..4, seed in 0u64..1000) {
        let ds = balanced_dataset(n_per_class, seed);
        let drop = drop.min(n_per_class - 1);
        // remove `drop` class-1 rows (odd indices) to unbalance
        let indices: Vec<usize> = (0..ds.n_samples() - 2 * drop)
            .chain((0..drop).map(|j| ds.n_samples() - 2 * drop + 2 * j))
            .collect();
        let balanced = undersample_to_balance(&ds, &indices, RngSeed(seed)).unwrap();
        let labels = ds.labels().unwrap();
        let c1 = balanced.iter().filter(|&&i| labels[i] == 1).count();
        prop_assert_eq!(c1 * 2, balanced.len());
        prop_assert!(balanced.iter().all(|i| indices.contains(i)));
    }

    #[test]
    fn pair_loss_nonnegative(zi in prop::collection::vec(-2.0f64..3.0, 2),
                             zj in prop::collection::vec(-2.0f64..3.0, 2),
                             same in any::<bool>()) {
        let batch = Array2::from_shape_vec((2, 2), [zi.clone(), zj.clone()].concat()).unwrap();
        let labels: [u8; 2] = if same { [1, 1] } else { [1, 0] };
        let loss = contrastive_loss(batch.view(), &labels, 0.25, 1.0);
        prop_assert!(loss >= 0.0);
        let d = zi.iter().zip(&zj).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let expected = if same { (d - 0.25).max(0.0) } else { (1.0 - d).max(0.0) };
        prop_assert!((loss - expected).abs() < 1e-5);
    }

    #[test]
    fn knn_confidence_bounded_and_flip_symmetric(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 5..30),
        labels in prop::collection::vec(0u8..2, 30),
        query in prop::collection::vec(0.0f64..1.0, 2),
        k in 1usize..6,
    ) {
        let n = rows.len();
        let k = k.min(n);
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let emb = Array2::from_shape_vec((n, 2), flat).unwrap();
        let labels = &labels[..n];
        let query = Array1::from_vec(query);
        let c = knn_confidence(query.view(), emb.view(), labels, k).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
        let flipped: Vec<u8> = labels.iter().map(|&y| 1 - y).collect();
        let cf = knn_confidence(query.view(), emb.view(), &flipped, k).unwrap();
        prop_assert!((c + cf - 1.0).abs() < 1e-9);
    }

    #[test]
    fn auroc_bounded_and_flip_complementary(
        scores in prop::collection::vec(0.0f64..1.0, 10..80),
        seed in 0u64..1000,
    ) {
        use rand::Rng;
        let mut rng = RngSeed(seed).rng();
        let labels: Vec<u8> = (0..scores.len()).map(|_| rng.gen_range(0..2)).collect();
        prop_assume!(labels.iter().any(|&y| y == 0) && labels.iter().any(|&y| y == 1));
        let a = auroc(&scores, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        let flipped: Vec<u8> = labels.iter().map(|&y| 1 - y).collect();
        let af = auroc(&scores, &flipped).unwrap();
        prop_assert!((a + af - 1.0).abs() < 1e-9);
    }

    #[test]
    fn default_p_even_and_maximal(n in 4usize..100_000) {
        let p = default_p(n).unwrap();
        prop_assert_eq!(p % 2, 0);
        prop_assert!((p * p) as f64 <= n as f64);
        // the next even integer overshoots
        prop_assert!(((p + 2) * (p + 2)) as f64 > n as f64);
    }

    #[test]
    fn st_selection_sorted_and_thresholded(
        confidences in prop::collection::vec(0.0f64..1.0, 0..40),
        p in 1usize..10,
    ) {
        let p = p * 2;
        let pool: Vec<_> = confidences
            .iter()
            .enumerate()
            .map(|(i, &c)| metric_dst::pseudolabel::PseudoLabel {
                sample_index: i,
                predicted_label: metric_dst::pseudolabel::classify(c),
                confidence: c,
                embedding: vec![0.5, 0.5],
            })
            .collect();
        let picked = select_st(&pool, p, 0.9);
        prop_assert!(picked.len() <= p);
        let scores: Vec<f64> = picked
            .iter()
            .map(|l| l.confidence.max(1.0 - l.confidence))
            .collect();
        prop_assert!(scores.iter().all(|&s| s >= 0.9));
        prop_assert!(scores.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn seed_forks_are_stable_and_distinct(seed in any::<u64>(), tag in 0u64..1000) {
        use rand::Rng;
        let a: u64 = RngSeed(seed).fork(tag).rng().gen();
        let b: u64 = RngSeed(seed).fork(tag).rng().gen();
        prop_assert_eq!(a, b);
        let c: u64 = RngSeed(seed).fork(tag + 1).rng().gen();
        prop_assert_ne!(a, c);
    }
}
