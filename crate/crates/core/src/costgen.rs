//! Random cost matrices: `Cost(i, j) ~ U[0, scale * p(i) / p(j)]` off the
//! diagonal, zero on it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{CostMatrix, PriorVector};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub const DEFAULT_SCALE: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostGenConfig {
    pub scale: f64,
    pub seed: u64,
}

impl CostGenConfig {
    pub fn new(scale: f64, seed: u64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("cost scale must be positive, got {scale}")));
        }
        Ok(Self { scale, seed })
    }
}

/// Draws entries row by row from a ChaCha8 stream seeded with
/// `config.seed`; each draw is `upper * u` with `u` uniform on `[0, 1)`.
pub fn generate_cost_matrix(priors: &PriorVector, config: &CostGenConfig) -> Result<CostMatrix> {
    CostGenConfig::new(config.scale, config.seed)?;
    let p = priors.as_slice();
    let c = p.len();
    let mut rng = rng_from_seed(config.seed);
    let rows: Vec<Vec<f64>> = (0..c)
        .map(|i| {
            (0..c)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        config.scale * p[i] / p[j] * rng.random::<f64>()
                    }
                })
                .collect()
        })
        .collect();
    CostMatrix::from_rows(&rows)
}

/// Cost matrix JSON with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedCostMatrix {
    #[serde(flatten)]
    pub matrix: CostMatrix,
    pub seed: u64,
    pub scale: f64,
    pub priors: PriorVector,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_bounds() {
        let p = PriorVector::new(vec![0.5, 0.5]).unwrap();
        for seed in 0..50 {
            let m = generate_cost_matrix(&p, &CostGenConfig::new(2000.0, seed).unwrap()).unwrap();
            assert_eq!(m.cost(0, 0), 0.0);
            assert_eq!(m.cost(1, 1), 0.0);
            assert!((0.0..=2000.0).contains(&m.cost(0, 1)));
            assert!((0.0..=2000.0).contains(&m.cost(1, 0)));
        }
    }

    #[test]
    fn imbalanced_monte_carlo_means() {
        let p = PriorVector::new(vec![0.9, 0.1]).unwrap();
        let (mut s01, mut s10) = (0.0, 0.0);
        let draws = 10_000;
        for seed in 0..draws {
            let m = generate_cost_matrix(&p, &CostGenConfig::new(2000.0, seed).unwrap()).unwrap();
            assert!(m.cost(0, 1) <= 2000.0 * 0.9 / 0.1);
            assert!(m.cost(1, 0) <= 2000.0 * 0.1 / 0.9);
            s01 += m.cost(0, 1);
            s10 += m.cost(1, 0);
        }
        let (m01, m10) = (s01 / draws as f64, s10 / draws as f64);
        // Half of each upper bound.
        assert!((m01 / 9000.0 - 1.0).abs() < 0.02, "{m01}");
        assert!((m10 / (1000.0 / 9.0) - 1.0).abs() < 0.02, "{m10}");
    }

    #[test]
    fn seed_reproduces_bits() {
        let p = PriorVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let cfg = CostGenConfig::new(2000.0, 77).unwrap();
        let a = generate_cost_matrix(&p, &cfg).unwrap();
        let b = generate_cost_matrix(&p, &cfg).unwrap();
        assert_eq!(a, b);
        let other = generate_cost_matrix(&p, &CostGenConfig::new(2000.0, 78).unwrap()).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(CostGenConfig::new(0.0, 1).is_err());
        assert!(CostGenConfig::new(f64::NAN, 1).is_err());
    }

    #[test]
    fn generated_json_carries_metadata() {
        let p = PriorVector::new(vec![0.5, 0.5]).unwrap();
        let cfg = CostGenConfig::new(2000.0, 3).unwrap();
        let g = GeneratedCostMatrix {
            matrix: generate_cost_matrix(&p, &cfg).unwrap(),
            seed: 3,
            scale: 2000.0,
            priors: p,
        };
        let text = serde_json::to_string(&g).unwrap();
        let plain: CostMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(plain, g.matrix);
        let back: GeneratedCostMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
    }
}
