//! Re-optimization: choose a weight vector `w` so that predicting
//! `argmax_j w_j * M_ij` minimizes total training cost, or a tree of binary
//! class-group decisions that approximates the same goal.
//!
//! The exact problem is NP-hard; every solver here is a heuristic.

mod ga;
mod lf;
mod metaclass;
mod threshold;

use serde::{Deserialize, Serialize};

pub use ga::{ga_optimize, ga_search, GaConfig, GaOutcome};
pub use lf::lf_optimize;
pub use metaclass::{metaclass_optimize, MetaClassTree};
pub use threshold::{threshold_moving, Threshold};

#[cfg(test)]
pub(crate) use threshold::oracle as threshold_oracle;

use crate::data::{argmax_lowest, CostMatrix, LabelAssignment, ScoreMatrix};
use crate::error::{Error, Result};

/// Multiplicative per-class weights. Entries may be zero or negative but
/// not all zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("weight vector is empty"));
        }
        if let Some(j) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::invalid(format!("weight {j} is not finite")));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::invalid("weight vector is all zeros"));
        }
        Ok(Self(weights))
    }

    pub fn ones(class_count: usize) -> Self {
        Self(vec![1.0; class_count])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightVector::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

fn check_weights(scores: &ScoreMatrix, w: &[f64]) -> Result<()> {
    if w.len() != scores.class_count() {
        return Err(Error::dims(format!(
            "{} weights for {} score columns",
            w.len(),
            scores.class_count()
        )));
    }
    Ok(())
}

#[inline]
fn weighted_argmax(row: &[f64], w: &[f64]) -> usize {
    let mut best = 0;
    let mut best_v = w[0] * row[0];
    for j in 1..row.len() {
        let v = w[j] * row[j];
        if v > best_v {
            best = j;
            best_v = v;
        }
    }
    best
}

/// Per row `argmax_j w_j * M_ij`, ties to the lowest class index.
pub fn weighted_decide(scores: &ScoreMatrix, w: &WeightVector) -> Result<LabelAssignment> {
    check_weights(scores, w.as_slice())?;
    let predictions = scores
        .rows()
        .map(|r| weighted_argmax(r, w.as_slice()))
        .collect();
    Ok(LabelAssignment::from_raw(predictions, scores.class_count()))
}

fn check_problem(scores: &ScoreMatrix, labels: &[usize], costs: &CostMatrix) -> Result<()> {
    scores.check_labels(labels)?;
    let c = scores.class_count();
    if costs.class_count() != c {
        return Err(Error::dims(format!(
            "cost matrix has {} classes, scores have {c}",
            costs.class_count()
        )));
    }
    if let Some(&y) = labels.iter().find(|&&y| y >= c) {
        return Err(Error::invalid(format!("label {y} exceeds class count {c}")));
    }
    Ok(())
}

/// Unchecked total cost of the weighted decision.
pub(crate) fn objective_unchecked(
    scores: &ScoreMatrix,
    labels: &[usize],
    costs: &CostMatrix,
    w: &[f64],
) -> f64 {
    scores
        .rows()
        .zip(labels)
        .map(|(r, &y)| costs.cost(y, weighted_argmax(r, w)))
        .sum()
}

/// Total training cost of [`weighted_decide`] under `costs`.
pub fn objective(
    scores: &ScoreMatrix,
    labels: &[usize],
    costs: &CostMatrix,
    w: &WeightVector,
) -> Result<f64> {
    check_problem(scores, labels, costs)?;
    check_weights(scores, w.as_slice())?;
    Ok(objective_unchecked(scores, labels, costs, w.as_slice()))
}

/// Plain argmax, the cost baseline.
pub fn raw_decide(scores: &ScoreMatrix) -> LabelAssignment {
    LabelAssignment::from_raw(
        scores.rows().map(argmax_lowest).collect(),
        scores.class_count(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::total_cost;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn unit_weights_are_raw() {
        let s = ScoreMatrix::from_rows(&[vec![0.2, 0.5, 0.3], vec![0.4, 0.4, 0.2]]).unwrap();
        let d = weighted_decide(&s, &WeightVector::ones(3)).unwrap();
        assert_eq!(d, s.argmax());
        assert_eq!(d.predictions(), &[1, 0]);
    }

    #[test]
    fn weights_flip_decision() {
        let s = ScoreMatrix::from_rows(&[vec![0.4, 0.9]]).unwrap();
        let w = WeightVector::new(vec![2.0, 0.0]).unwrap();
        assert_eq!(weighted_decide(&s, &w).unwrap().predictions(), &[0]);
    }

    #[test]
    fn random_case_matches_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
        let w = vec![0.7, -0.2, 1.3];
        let s = ScoreMatrix::from_rows(&rows).unwrap();
        let got = weighted_decide(&s, &WeightVector::new(w.clone()).unwrap()).unwrap();
        for (r, &p) in rows.iter().zip(got.predictions()) {
            let vals: Vec<f64> = r.iter().zip(&w).map(|(m, w)| m * w).collect();
            let expect = (0..3).find(|&j| vals.iter().all(|&v| vals[j] >= v)).unwrap();
            assert_eq!(p, expect);
        }
    }

    #[test]
    fn weight_vector_rejects_bad_input() {
        assert!(WeightVector::new(vec![0.0, 0.0]).is_err());
        assert!(WeightVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(WeightVector::new(vec![0.0, -0.5]).is_ok());
        assert!(serde_json::from_str::<WeightVector>("[0.0, 0.0]").is_err());
    }

    #[test]
    fn objective_examples() {
        let costs = CostMatrix::from_rows(&[vec![0.0, 2.0, 3.0], vec![1.0, 0.0, 4.0], vec![5.0, 6.0, 0.0]]).unwrap();
        let y = vec![0, 1, 2, 2];
        let one_hot: Vec<Vec<f64>> = y.iter().map(|&k| (0..3).map(|j| f64::from(u8::from(j == k))).collect()).collect();
        let s = ScoreMatrix::from_rows(&one_hot).unwrap();
        assert_eq!(objective(&s, &y, &costs, &WeightVector::ones(3)).unwrap(), 0.0);

        let noisy = ScoreMatrix::from_rows(&[vec![0.1, 0.6, 0.3], vec![0.5, 0.2, 0.3], vec![0.3, 0.3, 0.4], vec![0.6, 0.3, 0.1]]).unwrap();
        let raw = total_cost(&noisy.argmax(), &y, &costs).unwrap().total;
        assert_eq!(objective(&noisy, &y, &costs, &WeightVector::ones(3)).unwrap(), raw);
        // 2 + 1 + 0 + 5
        assert_eq!(raw, 8.0);

        let w = WeightVector::new(vec![0.5, 1.0, 2.0]).unwrap();
        let composed = total_cost(&weighted_decide(&noisy, &w).unwrap(), &y, &costs).unwrap().total;
        assert_eq!(objective(&noisy, &y, &costs, &w).unwrap(), composed);
    }

    proptest! {
        #[test]
        fn positive_scaling_invariant(
            rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 1..15),
            w in prop::collection::vec(-1.0f64..1.0, 4),
            k in -8i32..8,
        ) {
            prop_assume!(w.iter().any(|&v| v != 0.0));
            let alpha = 2f64.powi(k);
            let s = ScoreMatrix::from_rows(&rows).unwrap();
            let a = weighted_decide(&s, &WeightVector::new(w.clone()).unwrap()).unwrap();
            let scaled: Vec<f64> = w.iter().map(|v| v * alpha).collect();
            let b = weighted_decide(&s, &WeightVector::new(scaled).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn objective_zero_iff_all_correct(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 3..12),
            w in prop::collection::vec(0.1f64..1.0, 3),
        ) {
            let y: Vec<usize> = (0..rows.len()).map(|i| i % 3).collect();
            let costs = CostMatrix::from_rows(&[vec![0.0, 1.0, 2.0], vec![3.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap();
            let s = ScoreMatrix::from_rows(&rows).unwrap();
            let wv = WeightVector::new(w).unwrap();
            let obj = objective(&s, &y, &costs, &wv).unwrap();
            let d = weighted_decide(&s, &wv).unwrap();
            prop_assert!(obj >= 0.0);
            prop_assert_eq!(obj == 0.0, d.predictions() == y.as_slice());
        }
    }
}
