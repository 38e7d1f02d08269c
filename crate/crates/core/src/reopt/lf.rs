//! Greedy per-class weight fixing.
//!
//! The largest class gets weight 1. Each following class k (in descending
//! instance count) is then weighed against the classes already fixed: only
//! instances of k and of the fixed classes take part, every instance is
//! predicted either k or its best fixed class, and `w_k > 0` is chosen by a
//! threshold scan over the ratios `g(x) / M_xk` at which that prediction
//! flips, where `g(x)` is the largest fixed weighted score.

use crate::data::{class_counts, validate_labels, CostMatrix, ScoreMatrix};
use crate::error::Result;

use super::threshold::cut_between;
use super::{check_problem, WeightVector};

/// Weights processed in descending class size, ties by index.
pub(crate) fn processing_order(labels: &[usize], class_count: usize) -> Result<Vec<usize>> {
    let counts = class_counts(labels, class_count)?;
    let mut order: Vec<usize> = (0..class_count).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    Ok(order)
}

/// Best fixed weighted score and its class (lowest index on ties).
fn best_fixed(row: &[f64], w: &[f64], fixed: &[bool]) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for (j, (&m, &wj)) in row.iter().zip(w).enumerate() {
        if fixed[j] && wj * m > best.0 {
            best = (wj * m, j);
        }
    }
    best
}

/// Chooses `w_k` given the already fixed weights.
pub(crate) fn lf_step(
    scores: &ScoreMatrix,
    labels: &[usize],
    costs: &CostMatrix,
    w: &[f64],
    fixed: &[bool],
    k: usize,
) -> f64 {
    let mut base = 0.0;
    // (breakpoint, cost change when the weight moves past it)
    let mut events: Vec<(f64, f64)> = Vec::new();
    for (row, &y) in scores.rows().zip(labels) {
        if !(fixed[y] || y == k) {
            continue;
        }
        let (g, f) = best_fixed(row, w, fixed);
        let to_k = costs.cost(y, k);
        let to_f = costs.cost(y, f);
        let m = row[k];
        if m > 0.0 {
            let tau = g / m;
            if tau <= 0.0 {
                base += to_k;
            } else {
                base += to_f;
                events.push((tau, to_k - to_f));
            }
        } else if m == 0.0 {
            let k_wins = if k < f { 0.0 >= g } else { 0.0 > g };
            base += if k_wins { to_k } else { to_f };
        } else {
            let sigma = g / m;
            if sigma <= 0.0 {
                base += to_f;
            } else {
                base += to_k;
                events.push((sigma, to_f - to_k));
            }
        }
    }
    if events.is_empty() {
        return 1.0;
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let first = events[0].0 / 2.0;
    let mut best = (if first > 0.0 { first } else { events[0].0 }, base);
    let mut cost = base;
    let mut i = 0;
    while i < events.len() {
        let b = events[i].0;
        while i < events.len() && events[i].0 == b {
            cost += events[i].1;
            i += 1;
        }
        let candidate = if i < events.len() {
            cut_between(b, events[i].0)
        } else if (2.0 * b).is_finite() {
            2.0 * b
        } else {
            b
        };
        if cost < best.1 {
            best = (candidate, cost);
        }
    }
    best.0
}

pub fn lf_optimize(
    scores: &ScoreMatrix,
    labels: &[usize],
    costs: &CostMatrix,
) -> Result<WeightVector> {
    check_problem(scores, labels, costs)?;
    let c = scores.class_count();
    validate_labels(labels, c)?;
    let order = processing_order(labels, c)?;
    let mut w = vec![0.0; c];
    let mut fixed = vec![false; c];
    w[order[0]] = 1.0;
    fixed[order[0]] = true;
    for &k in &order[1..] {
        w[k] = lf_step(scores, labels, costs, &w, &fixed, k);
        fixed[k] = true;
    }
    WeightVector::new(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reopt::{objective, threshold_moving};
    use rand::{Rng, SeedableRng};

    fn random_positive(rng: &mut impl Rng, n: usize, c: usize) -> ScoreMatrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..c).map(|_| rng.random_range(0.05..1.0)).collect())
            .collect();
        ScoreMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn two_classes_reduce_to_threshold_moving() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for trial in 0..50 {
            let n = 12;
            let s = random_positive(&mut rng, n, 2);
            // Class 0 is larger, so it is fixed first and class 1 moves.
            let y: Vec<usize> = (0..n).map(|i| usize::from(i % 3 == 0)).collect();
            let c01 = rng.random_range(0.5..5.0);
            let c10 = rng.random_range(0.5..5.0);
            let costs = CostMatrix::from_rows(&[vec![0.0, c01], vec![c10, 0.0]]).unwrap();
            let w = lf_optimize(&s, &y, &costs).unwrap();
            assert_eq!(w.as_slice()[0], 1.0);
            let lf_cost = objective(&s, &y, &costs, &w).unwrap();

            let ratio = |i: usize| s.get(i, 1) / s.get(i, 0);
            let pos: Vec<f64> = (0..n).filter(|&i| y[i] == 1).map(ratio).collect();
            let neg: Vec<f64> = (0..n).filter(|&i| y[i] == 0).map(ratio).collect();
            let t = threshold_moving(&pos, &neg, |fp, fn_| fp as f64 * c01 + fn_ as f64 * c10);
            assert!((lf_cost - t.cost).abs() < 1e-9, "trial {trial}: {lf_cost} vs {}", t.cost);
        }
    }

    #[test]
    fn one_hot_scores_reach_zero() {
        let y = vec![0, 1, 2, 0, 1, 2, 2];
        let rows: Vec<Vec<f64>> = y.iter().map(|&k| (0..3).map(|j| if j == k { 0.9 } else { 0.05 }).collect()).collect();
        let s = ScoreMatrix::from_rows(&rows).unwrap();
        let costs = CostMatrix::from_rows(&[vec![0.0, 9.0, 1.0], vec![1.0, 0.0, 7.0], vec![3.0, 2.0, 0.0]]).unwrap();
        let w = lf_optimize(&s, &y, &costs).unwrap();
        assert_eq!(objective(&s, &y, &costs, &w).unwrap(), 0.0);
    }

    /// Step-by-step replay with brute-force weight selection: candidates are
    /// every flip ratio and the midpoints between them, each evaluated by
    /// deciding the step's instances directly.
    #[test]
    fn replay_three_class_toy() {
        let rows = vec![
            vec![0.6, 0.3, 0.1],
            vec![0.5, 0.2, 0.3],
            vec![0.4, 0.35, 0.25],
            vec![0.3, 0.5, 0.2],
            vec![0.45, 0.4, 0.15],
            vec![0.2, 0.3, 0.5],
            vec![0.35, 0.25, 0.4],
            vec![0.5, 0.1, 0.4],
            vec![0.3, 0.45, 0.25],
        ];
        let y = vec![0, 0, 0, 1, 1, 2, 2, 2, 0];
        let s = ScoreMatrix::from_rows(&rows).unwrap();
        let costs = CostMatrix::from_rows(&[vec![0.0, 2.0, 6.0], vec![5.0, 0.0, 1.0], vec![4.0, 3.0, 0.0]]).unwrap();
        let got = lf_optimize(&s, &y, &costs).unwrap();

        // Replay: order by size is [0, 2, 1].
        let mut w = [1.0, 0.0, 0.0];
        let mut fixed = [true, false, false];
        for k in [2usize, 1] {
            let members: Vec<usize> = (0..9).filter(|&i| fixed[y[i]] || y[i] == k).collect();
            let step_cost = |v: f64| -> f64 {
                members
                    .iter()
                    .map(|&i| {
                        let mut ww = w;
                        ww[k] = v;
                        let mut best = None::<(f64, usize)>;
                        for j in 0..3 {
                            if !(fixed[j] || j == k) {
                                continue;
                            }
                            let val = ww[j] * rows[i][j];
                            if best.is_none_or(|(b, _)| val > b) {
                                best = Some((val, j));
                            }
                        }
                        costs.cost(y[i], best.unwrap().1)
                    })
                    .sum()
            };
            let mut ratios: Vec<f64> = members
                .iter()
                .map(|&i| (0..3).filter(|&j| fixed[j]).map(|j| w[j] * rows[i][j]).fold(f64::MIN, f64::max) / rows[i][k])
                .collect();
            ratios.sort_by(f64::total_cmp);
            ratios.dedup();
            let mut cands = vec![ratios[0] / 2.0];
            cands.extend(ratios.windows(2).map(|p| (p[0] + p[1]) / 2.0));
            cands.push(ratios[ratios.len() - 1] * 2.0);
            let best = cands.iter().map(|&v| step_cost(v)).fold(f64::INFINITY, f64::min);
            let chosen = got.as_slice()[k];
            assert!((step_cost(chosen) - best).abs() < 1e-12, "class {k}");
            w[k] = chosen;
            fixed[k] = true;
        }
        let replay = objective(&s, &y, &costs, &WeightVector::new(w.to_vec()).unwrap()).unwrap();
        assert_eq!(replay, objective(&s, &y, &costs, &got).unwrap());
    }

    #[test]
    fn order_is_by_size() {
        assert_eq!(processing_order(&[2, 2, 1, 0, 2, 1], 3).unwrap(), vec![2, 1, 0]);
        assert_eq!(processing_order(&[0, 1], 2).unwrap(), vec![0, 1]);
    }
}
