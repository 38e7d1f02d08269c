//! Threshold moving for binary scorers.

use serde::{Deserialize, Serialize};

/// A chosen cut: scores strictly above `threshold` are predicted positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub threshold: f64,
    pub cost: f64,
}

/// Midpoint of `lo < hi`, or `lo` when the midpoint rounds up to `hi`, so
/// that `lo` is always below the cut and `hi` above it.
pub(crate) fn cut_between(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

/// Scans every distinct cut and returns one minimizing
/// `cost_fn(false_positives, false_negatives)`. Among equal costs the
/// largest threshold (fewest positives) wins.
pub fn threshold_moving<F>(pos_scores: &[f64], neg_scores: &[f64], cost_fn: F) -> Threshold
where
    F: Fn(usize, usize) -> f64,
{
    let mut all: Vec<(f64, bool)> = pos_scores
        .iter()
        .map(|&s| (s, true))
        .chain(neg_scores.iter().map(|&s| (s, false)))
        .collect();
    all.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    // Start at -inf: everything positive.
    let mut fp = neg_scores.len();
    let mut fn_ = 0;
    let mut best = Threshold {
        threshold: f64::NEG_INFINITY,
        cost: cost_fn(fp, fn_),
    };
    let mut i = 0;
    while i < all.len() {
        let v = all[i].0;
        while i < all.len() && all[i].0 == v {
            if all[i].1 {
                fn_ += 1;
            } else {
                fp -= 1;
            }
            i += 1;
        }
        let threshold = if i < all.len() {
            cut_between(v, all[i].0)
        } else {
            f64::INFINITY
        };
        let cost = cost_fn(fp, fn_);
        if cost <= best.cost {
            best = Threshold { threshold, cost };
        }
    }
    best
}
