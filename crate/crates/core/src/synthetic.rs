//! Gaussian blob datasets for end-to-end runs without external data.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Class `j` gets a share proportional to `imbalance^(-j / (c - 1))`, so the
/// largest class is `imbalance` times the smallest. Class means are drawn
/// from `N(0, separation^2 I)`; within-class noise is standard normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub instances: usize,
    pub features: usize,
    #[serde(default = "one")]
    pub imbalance: f64,
    #[serde(default = "one")]
    pub separation: f64,
    /// Falls back to a seed derived from the experiment's master seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn one() -> f64 {
    1.0
}

/// Smallest class size produced by [`generate`].
pub const MIN_CLASS_SIZE: usize = 5;

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::invalid("synthetic data needs at least 2 classes"));
        }
        if self.features == 0 {
            return Err(Error::invalid("synthetic data needs at least 1 feature"));
        }
        if self.instances < self.classes * MIN_CLASS_SIZE {
            return Err(Error::invalid(format!(
                "{} instances are too few for {} classes of at least {MIN_CLASS_SIZE}",
                self.instances, self.classes
            )));
        }
        if !(self.imbalance >= 1.0 && self.imbalance.is_finite()) {
            return Err(Error::invalid("imbalance must be a finite ratio >= 1"));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::invalid("separation must be finite and non-negative"));
        }
        Ok(())
    }

    /// Instance count per class, summing to `instances`.
    pub fn class_sizes(&self) -> Vec<usize> {
        let c = self.classes;
        let weights: Vec<f64> = (0..c)
            .map(|j| self.imbalance.powf(-(j as f64) / (c - 1) as f64))
            .collect();
        let total: f64 = weights.iter().sum();
        let spare = self.instances - c * MIN_CLASS_SIZE;
        let mut sizes: Vec<usize> = weights
            .iter()
            .map(|w| MIN_CLASS_SIZE + (spare as f64 * w / total).floor() as usize)
            .collect();
        let mut left = self.instances - sizes.iter().sum::<usize>();
        let mut j = 0;
        while left > 0 {
            sizes[j % c] += 1;
            left -= 1;
            j += 1;
        }
        sizes
    }
}

/// Draws the dataset. Instances are interleaved by class so that no
/// ordering artifact survives into cross-validation.
pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed.unwrap_or(seed));
    let means: Vec<Vec<f64>> = (0..spec.classes)
        .map(|_| {
            (0..spec.features)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    spec.separation * z
                })
                .collect()
        })
        .collect();
    let sizes = spec.class_sizes();
    let mut labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(j, &k)| std::iter::repeat_n(j, k))
        .collect();
    for i in (1..labels.len()).rev() {
        labels.swap(i, rng.random_range(0..=i));
    }
    let features = labels
        .iter()
        .map(|&y| {
            means[y]
                .iter()
                .map(|mu| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    mu + z
                })
                .collect()
        })
        .collect();
    let names = (0..spec.classes).map(|j| format!("c{j}")).collect();
    LabeledDataset::new(features, labels, spec.classes, names)
}
