//! Ranking and cost metrics.

use serde::{Deserialize, Serialize};

use crate::data::{CostMatrix, LabelAssignment, ScoreMatrix};
use crate::error::{Error, Result};

/// Probability that a random positive outranks a random negative, with
/// half credit for ties.
///
/// Sort-based: within each group of tied scores, every positive beats all
/// negatives strictly below the group and ties with the negatives inside
/// it. Twice the pair sum is accumulated as an integer, so the result is
/// the correctly rounded value of the exact pair-enumeration fraction.
pub fn binary_auc(pos_scores: &[f64], neg_scores: &[f64]) -> Result<f64> {
    if pos_scores.is_empty() || neg_scores.is_empty() {
        return Err(Error::invalid(
            "AUC is undefined without both positive and negative instances",
        ));
    }
    if pos_scores.iter().chain(neg_scores).any(|v| !v.is_finite()) {
        return Err(Error::invalid("AUC scores must be finite"));
    }
    let mut all: Vec<(f64, bool)> = pos_scores
        .iter()
        .map(|&s| (s, true))
        .chain(neg_scores.iter().map(|&s| (s, false)))
        .collect();
    all.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let mut twice_sum: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u128, 0u128);
        // -0.0 and 0.0 tie under `==`, so group by value equality.
        while j < all.len() && all[j].0 == all[i].0 {
            if all[j].1 {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        twice_sum += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    let pairs = pos_scores.len() as u128 * neg_scores.len() as u128;
    Ok(twice_sum as f64 / (2 * pairs) as f64)
}

/// c x c table of directional pairwise AUCs; `get(i, j)` is the AUC of
/// column i separating class i (positive) from class j (negative).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseAucTable {
    values: Vec<f64>,
    class_count: usize,
}

impl PairwiseAucTable {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.class_count + j]
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Mean over unordered pairs of `(A_ij + A_ji) / 2`. The diagonal never
    /// enters the sum.
    pub fn mauc(&self) -> f64 {
        let c = self.class_count;
        let mut sum = 0.0;
        for i in 0..c {
            for j in i + 1..c {
                sum += (self.get(i, j) + self.get(j, i)) / 2.0;
            }
        }
        2.0 * sum / (c * (c - 1)) as f64
    }
}

fn columns_by_class(scores: &ScoreMatrix, labels: &[usize]) -> Result<Vec<Vec<usize>>> {
    scores.check_labels(labels)?;
    let c = scores.class_count();
    if c < 2 {
        return Err(Error::invalid("MAUC needs at least two classes"));
    }
    let mut members = vec![Vec::new(); c];
    for (i, &y) in labels.iter().enumerate() {
        if y >= c {
            return Err(Error::invalid(format!("label {y} at row {i} exceeds class count {c}")));
        }
        members[y].push(i);
    }
    if let Some(k) = members.iter().position(Vec::is_empty) {
        return Err(Error::invalid(format!("class {k} has no instances")));
    }
    Ok(members)
}

pub fn pairwise_auc_table(scores: &ScoreMatrix, labels: &[usize]) -> Result<PairwiseAucTable> {
    let members = columns_by_class(scores, labels)?;
    let c = scores.class_count();
    let mut values = vec![1.0; c * c];
    for i in 0..c {
        let pos: Vec<f64> = members[i].iter().map(|&r| scores.get(r, i)).collect();
        for j in 0..c {
            if i == j {
                continue;
            }
            let neg: Vec<f64> = members[j].iter().map(|&r| scores.get(r, i)).collect();
            values[i * c + j] = binary_auc(&pos, &neg)?;
        }
    }
    Ok(PairwiseAucTable {
        values,
        class_count: c,
    })
}

/// Hand and Till multi-class AUC.
pub fn mauc(scores: &ScoreMatrix, labels: &[usize]) -> Result<f64> {
    Ok(pairwise_auc_table(scores, labels)?.mauc())
}

pub fn accuracy(predictions: &LabelAssignment, labels: &[usize]) -> Result<f64> {
    let p = predictions.predictions();
    if p.len() != labels.len() {
        return Err(Error::dims(format!(
            "{} predictions for {} labels",
            p.len(),
            labels.len()
        )));
    }
    if p.is_empty() {
        return Err(Error::invalid("accuracy of an empty assignment is undefined"));
    }
    let hits = p.iter().zip(labels).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / p.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub total: f64,
    pub per_instance: f64,
}

/// `sum_i Cost(y_i, pred_i)` and its mean over instances.
pub fn total_cost(
    predictions: &LabelAssignment,
    labels: &[usize],
    costs: &CostMatrix,
) -> Result<CostSummary> {
    let p = predictions.predictions();
    if p.len() != labels.len() {
        return Err(Error::dims(format!(
            "{} predictions for {} labels",
            p.len(),
            labels.len()
        )));
    }
    let c = costs.class_count();
    if predictions.class_count() != c {
        return Err(Error::dims(format!(
            "predictions over {} classes, cost matrix has {c}",
            predictions.class_count()
        )));
    }
    if let Some(&y) = labels.iter().find(|&&y| y >= c) {
        return Err(Error::invalid(format!("label {y} exceeds class count {c}")));
    }
    let total: f64 = labels.iter().zip(p).map(|(&y, &q)| costs.cost(y, q)).sum();
    let per_instance = if p.is_empty() { 0.0 } else { total / p.len() as f64 };
    Ok(CostSummary {
        total,
        per_instance,
    })
}
