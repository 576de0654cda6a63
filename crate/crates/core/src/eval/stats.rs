//! Two-sided Wilcoxon signed-rank test with exact enumeration for small n
//! and a continuity-corrected normal approximation above.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest n for which the exact 2^n sign enumeration is used.
const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// W = min(W+, W-).
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    /// Nonzero differences used by the test.
    pub n_used: usize,
}

/// Average ranks of |differences|, ties sharing their mean rank.
fn average_ranks(abs_diffs: &[f64]) -> Vec<f64> {
    let n = abs_diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| abs_diffs[a].partial_cmp(&abs_diffs[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && abs_diffs[order[j]] == abs_diffs[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

/// Exact two-sided p-value by enumerating all 2^n sign assignments over the
/// observed ranks: `2 * min(P(W+ <= w+), P(W+ >= w+))`, capped at 1.
fn exact_p_value(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len();
    let total = 1u64 << n;
    let mut le = 0u64;
    let mut ge = 0u64;
    let eps = 1e-9;
    for mask in 0..total {
        let mut w = 0.0;
        for (bit, &r) in ranks.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                w += r;
            }
        }
        if w <= w_plus + eps {
            le += 1;
        }
        if w >= w_plus - eps {
            ge += 1;
        }
    }
    let p = 2.0 * (le.min(ge) as f64) / total as f64;
    p.min(1.0)
}

/// Normal approximation with continuity correction and tie correction.
fn approx_p_value(ranks: &[f64], w: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    // tie correction: sum of (t^3 - t) over tied groups
    let mut sorted = ranks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    // continuity correction toward the mean
    let z = (w - mean + 0.5) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).unwrap();
    (2.0 * normal.cdf(z)).min(1.0)
}

/// Two-sided paired Wilcoxon signed-rank test on `a - b`. Zero differences
/// are dropped; |differences| are ranked with average ranks for ties. The
/// p-value is exact (full sign enumeration) for n <= 20 and a
/// continuity-corrected normal approximation above.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument("paired samples differ in length".into()));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(Error::DegeneratePairing);
    }
    if diffs.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "only {} nonzero differences; need at least 5",
            diffs.len()
        )));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, &r)| r)
        .sum();
    let rank_total: f64 = ranks.iter().sum();
    let w_minus = rank_total - w_plus;
    let statistic = w_plus.min(w_minus);
    let p_value = if diffs.len() <= EXACT_LIMIT {
        exact_p_value(&ranks, w_plus)
    } else {
        approx_p_value(&ranks, statistic)
    };
    Ok(WilcoxonResult {
        statistic,
        w_plus,
        w_minus,
        p_value,
        n_used: diffs.len(),
    })
}
