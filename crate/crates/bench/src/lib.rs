//! Benchmark fixtures: seeded score problems of a given shape.

use costsens::costgen::{generate_cost_matrix, CostGenConfig};
use costsens::data::empirical_priors;
use costsens::rng::rng_from_seed;
use costsens::{CostMatrix, ScoreMatrix};
use rand::Rng;

pub struct Problem {
    pub scores: ScoreMatrix,
    pub labels: Vec<usize>,
    pub costs: CostMatrix,
}

/// `n` instances over `c` classes with class `j` drawn about twice as often
/// as class `j + 1`. Scores lean toward the true class, so the problem is
/// learnable but noisy.
pub fn problem(n: usize, c: usize, seed: u64) -> Problem {
    let mut rng = rng_from_seed(seed);
    let weights: Vec<f64> = (0..c).map(|j| 0.5f64.powi(j as i32)).collect();
    let total: f64 = weights.iter().sum();
    let mut labels: Vec<usize> = (0..n)
        .map(|_| {
            let mut u = rng.random::<f64>() * total;
            weights
                .iter()
                .position(|&w| {
                    u -= w;
                    u < 0.0
                })
                .unwrap_or(c - 1)
        })
        .collect();
    // every class present
    for (j, y) in labels.iter_mut().take(c).enumerate() {
        *y = j;
    }
    let mut data = Vec::with_capacity(n * c);
    for &y in &labels {
        for j in 0..c {
            let bump = if j == y { 0.3 } else { 0.0 };
            data.push(rng.random::<f64>() + bump);
        }
    }
    let scores = ScoreMatrix::from_row_major(data, n, c).expect("finite scores");
    let priors = empirical_priors(&labels, c).expect("all classes present");
    let costs = generate_cost_matrix(&priors, &CostGenConfig::new(2000.0, seed).expect("scale"))
        .expect("cost matrix");
    Problem {
        scores,
        labels,
        costs,
    }
}

/// Binary score/label split of column `k` of a problem.
pub fn one_vs_rest(p: &Problem, k: usize) -> (Vec<f64>, Vec<bool>) {
    (p.scores.column(k), p.labels.iter().map(|&y| y == k).collect())
}
