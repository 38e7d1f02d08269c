//! Gaussian naive Bayes, the built-in base scorer.

use serde::{Deserialize, Serialize};

use crate::data::{empirical_priors, LabeledDataset, ScoreMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel {
    /// `means[j][f]` for class j, feature f.
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub log_priors: Vec<f64>,
    pub epsilon: f64,
}

/// `1e-9` times the largest per-feature variance of the whole dataset, or
/// `1e-9` when every feature is constant.
pub fn default_variance_floor(data: &LabeledDataset) -> f64 {
    let n = data.len() as f64;
    let m = data.feature_count();
    let mut max_var: f64 = 0.0;
    for f in 0..m {
        let mean = data.rows().map(|r| r[f]).sum::<f64>() / n;
        let var = data.rows().map(|r| (r[f] - mean).powi(2)).sum::<f64>() / n;
        max_var = max_var.max(var);
    }
    if max_var > 0.0 {
        1e-9 * max_var
    } else {
        1e-9
    }
}

/// Per-class feature means and population variances, the latter floored
/// at `epsilon`.
pub fn fit_nb(train: &LabeledDataset, epsilon: f64) -> Result<GaussianNbModel> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("variance floor must be positive, got {epsilon}")));
    }
    let c = train.class_count();
    let m = train.feature_count();
    let priors = empirical_priors(train.labels(), c)?;
    let mut counts = vec![0usize; c];
    let mut sums = vec![vec![0.0; m]; c];
    for (row, &y) in train.rows().zip(train.labels()) {
        counts[y] += 1;
        for (s, v) in sums[y].iter_mut().zip(row) {
            *s += v;
        }
    }
    let means: Vec<Vec<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &k)| s.iter().map(|v| v / k as f64).collect())
        .collect();
    let mut sq = vec![vec![0.0; m]; c];
    for (row, &y) in train.rows().zip(train.labels()) {
        for f in 0..m {
            sq[y][f] += (row[f] - means[y][f]).powi(2);
        }
    }
    let variances = sq
        .iter()
        .zip(&counts)
        .map(|(s, &k)| s.iter().map(|v| (v / k as f64).max(epsilon)).collect())
        .collect();
    Ok(GaussianNbModel {
        means,
        variances,
        log_priors: priors.as_slice().iter().map(|p| p.ln()).collect(),
        epsilon,
    })
}

impl GaussianNbModel {
    pub fn class_count(&self) -> usize {
        self.log_priors.len()
    }

    pub fn feature_count(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    fn log_joint(&self, x: &[f64], out: &mut [f64]) {
        const LN_2PI: f64 = 1.837_877_066_409_345_5;
        for (j, o) in out.iter_mut().enumerate() {
            let mut s = self.log_priors[j];
            for ((v, mu), var) in x.iter().zip(&self.means[j]).zip(&self.variances[j]) {
                let z = (v - mu) / var.sqrt();
                s -= 0.5 * (LN_2PI + var.ln() + z * z);
            }
            *o = s;
        }
    }

    /// Posterior class probabilities for each row, normalized with
    /// log-sum-exp.
    pub fn score_rows<'a, I>(&self, rows: I) -> Result<ScoreMatrix>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let c = self.class_count();
        let m = self.feature_count();
        let mut data = Vec::new();
        let mut buf = vec![0.0; c];
        let mut n = 0;
        for (i, x) in rows.into_iter().enumerate() {
            if x.len() != m {
                return Err(Error::dims(format!("row {i} has {} features, model expects {m}", x.len())));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} has a non-finite feature")));
            }
            self.log_joint(x, &mut buf);
            let top = buf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = top + buf.iter().map(|v| (v - top).exp()).sum::<f64>().ln();
            data.extend(buf.iter().map(|v| (v - lse).exp()));
            n += 1;
        }
        ScoreMatrix::from_row_major(data, n, c)
    }
}

pub fn score_nb(model: &GaussianNbModel, features: &[Vec<f64>]) -> Result<ScoreMatrix> {
    model.score_rows(features.iter().map(Vec::as_slice))
}
