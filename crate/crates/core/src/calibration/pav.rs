//! Isotonic regression by pool-adjacent-violators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stepwise-constant calibrator. `plateau_values[k]` applies to scores in
/// `[breakpoints[k-1], breakpoints[k])`, with the ends open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotonicModel {
    pub breakpoints: Vec<f64>,
    pub plateau_values: Vec<f64>,
}

struct Block {
    sum: f64,
    weight: f64,
    lo: f64,
    hi: f64,
}

impl Block {
    fn mean(&self) -> f64 {
        self.sum / self.weight
    }
}

/// Fits a non-decreasing map from score to positive-class frequency.
/// Instances with equal scores are pooled before any violator is merged.
pub fn fit_pav(scores: &[f64], labels: &[bool]) -> Result<IsotonicModel> {
    if scores.len() != labels.len() {
        return Err(Error::dims(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("PAV scores must be finite"));
    }
    let positives = labels.iter().filter(|&&y| y).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::invalid(
            "PAV fitting needs both positive and negative instances",
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&i, &j| scores[i].total_cmp(&scores[j]));

    let mut blocks: Vec<Block> = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        let mut tie = Block {
            sum: 0.0,
            weight: 0.0,
            lo: s,
            hi: s,
        };
        while k < order.len() && scores[order[k]] == s {
            tie.sum += f64::from(u8::from(labels[order[k]]));
            tie.weight += 1.0;
            k += 1;
        }
        blocks.push(tie);
        // Pool while the previous block's mean exceeds the new one.
        while blocks.len() > 1 {
            let last = &blocks[blocks.len() - 1];
            let prev = &blocks[blocks.len() - 2];
            if prev.sum * last.weight <= last.sum * prev.weight {
                break;
            }
            let last = blocks.pop().unwrap();
            let prev = blocks.last_mut().unwrap();
            prev.sum += last.sum;
            prev.weight += last.weight;
            prev.hi = last.hi;
        }
    }

    let breakpoints = blocks
        .windows(2)
        .map(|w| w[0].hi + (w[1].lo - w[0].hi) / 2.0)
        .collect();
    let plateau_values = blocks.iter().map(Block::mean).collect();
    Ok(IsotonicModel {
        breakpoints,
        plateau_values,
    })
}

impl IsotonicModel {
    pub fn predict(&self, score: f64) -> f64 {
        let block = self.breakpoints.partition_point(|&b| b <= score);
        self.plateau_values[block]
    }
}

/// Maps each score to its plateau; out-of-range scores clamp to the ends.
pub fn apply_pav(model: &IsotonicModel, scores: &[f64]) -> Result<Vec<f64>> {
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("PAV scores must be finite"));
    }
    Ok(scores.iter().map(|&s| model.predict(s)).collect())
}

#[cfg(test)]
pub(crate) mod oracle {
    /// Isotonic least squares from the min-max characterization over score
    /// groups: `f(g) = max_{a<=g} min_{b>=g} mean(a..=b)`. Returns the fitted
    /// value of every input instance.
    pub fn isotonic_by_intervals(scores: &[f64], labels: &[bool]) -> Vec<f64> {
        let mut distinct: Vec<f64> = scores.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let g = distinct.len();
        let mut sums = vec![0.0; g];
        let mut counts = vec![0.0; g];
        for (&s, &y) in scores.iter().zip(labels) {
            let k = distinct.iter().position(|&d| d == s).unwrap();
            sums[k] += f64::from(u8::from(y));
            counts[k] += 1.0;
        }
        let fitted: Vec<f64> = (0..g)
            .map(|k| {
                (0..=k)
                    .map(|a| {
                        (k..g)
                            .map(|b| {
                                let s: f64 = sums[a..=b].iter().sum();
                                let w: f64 = counts[a..=b].iter().sum();
                                s / w
                            })
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        scores
            .iter()
            .map(|&s| fitted[distinct.iter().position(|&d| d == s).unwrap()])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::isotonic_by_intervals;
    use super::*;
    use proptest::prelude::*;

    fn b(v: &[u8]) -> Vec<bool> {
        v.iter().map(|&x| x == 1).collect()
    }

    #[test]
    fn already_isotonic() {
        let m = fit_pav(&[1.0, 2.0, 3.0], &b(&[0, 1, 1])).unwrap();
        assert_eq!(m.plateau_values, vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn single_violator_pools() {
        let m = fit_pav(&[1.0, 2.0], &b(&[1, 0])).unwrap();
        assert_eq!(m.plateau_values, vec![0.5]);
        // Two-variable check: f1 <= f2 with f1 = f2 = x minimizes (1-x)^2 + x^2.
        assert!(m.breakpoints.is_empty());
    }

    #[test]
    fn five_points() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = b(&[0, 1, 1, 0, 1]);
        let m = fit_pav(&s, &y).unwrap();
        let fitted = apply_pav(&m, &s).unwrap();
        let two_thirds = 2.0 / 3.0;
        let expect = [0.0, two_thirds, two_thirds, two_thirds, 1.0];
        for (f, e) in fitted.iter().zip(expect) {
            assert!((f - e).abs() < 1e-15);
        }
        assert_eq!(isotonic_by_intervals(&s, &y), expect.to_vec());
        assert!((m.predict(3.5) - two_thirds).abs() < 1e-15);
        assert_eq!(m.breakpoints, vec![1.5, 4.5]);
    }

    #[test]
    fn clamps_out_of_range() {
        let m = IsotonicModel {
            breakpoints: vec![2.5],
            plateau_values: vec![0.0, 1.0],
        };
        assert_eq!(apply_pav(&m, &[1.0, 9.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn ties_are_pooled_first() {
        let m = fit_pav(&[1.0, 1.0, 2.0], &b(&[1, 0, 1])).unwrap();
        assert_eq!(m.plateau_values, vec![0.5, 1.0]);
        assert_eq!(m.breakpoints, vec![1.5]);
    }

    #[test]
    fn single_class_rejected() {
        assert!(fit_pav(&[1.0, 2.0], &b(&[1, 1])).is_err());
        assert!(fit_pav(&[1.0, 2.0], &b(&[0, 0])).is_err());
    }

    proptest! {
        #[test]
        fn matches_interval_oracle(
            pts in prop::collection::vec(((0u8..6).prop_map(f64::from), any::<bool>()), 2..13)
        ) {
            let (s, y): (Vec<f64>, Vec<bool>) = pts.into_iter().unzip();
            prop_assume!(y.iter().any(|&v| v) && y.iter().any(|&v| !v));
            let m = fit_pav(&s, &y).unwrap();
            prop_assert!(m.plateau_values.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(m.breakpoints.windows(2).all(|w| w[0] < w[1]));
            let fitted = apply_pav(&m, &s).unwrap();
            let oracle = isotonic_by_intervals(&s, &y);
            for (f, o) in fitted.iter().zip(&oracle) {
                prop_assert!((f - o).abs() < 1e-9);
            }
        }
    }
}
