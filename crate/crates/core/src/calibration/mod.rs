//! Turning score columns into class posteriors and deciding by expected
//! cost.
//!
//! Each column is calibrated one-vs-rest (class j against all others) and
//! the per-class probabilities are normalized to sum to one per row. Rows
//! whose calibrated mass vanishes fall back to the training priors.

mod pav;
mod platt;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use pav::{apply_pav, fit_pav, IsotonicModel};
pub use platt::{
    apply_platt, fit_platt, platt_gradient, platt_objective, PlattParams, PlattTargets,
};


use crate::data::{empirical_priors, CostMatrix, LabelAssignment, PriorVector, ScoreMatrix};
use crate::error::{Error, Result};

/// Row sums below this are treated as zero during normalization.
pub const DEGENERATE_ROW_SUM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationMethod {
    Platt,
    Pav,
}

impl fmt::Display for CalibrationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CalibrationMethod::Platt => "platt",
            CalibrationMethod::Pav => "pav",
        })
    }
}

impl FromStr for CalibrationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "platt" => Ok(Self::Platt),
            "pav" | "isotonic" => Ok(Self::Pav),
            other => Err(Error::invalid(format!("unknown calibration method '{other}'"))),
        }
    }
}

/// A fitted binary calibrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Calibrator {
    Platt(PlattParams),
    Pav(IsotonicModel),
}

impl Calibrator {
    pub fn fit(method: CalibrationMethod, scores: &[f64], labels: &[bool]) -> Result<Self> {
        match method {
            CalibrationMethod::Platt => fit_platt(scores, labels).map(Calibrator::Platt),
            CalibrationMethod::Pav => fit_pav(scores, labels).map(Calibrator::Pav),
        }
    }

    pub fn apply(&self, scores: &[f64]) -> Result<Vec<f64>> {
        match self {
            Calibrator::Platt(p) => apply_platt(*p, scores),
            Calibrator::Pav(m) => apply_pav(m, scores),
        }
    }
}

/// n x c posterior estimates; rows sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    data: Vec<f64>,
    cols: usize,
}

impl ProbabilityMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::dims(format!("probability row {i} has wrong width")));
            }
            if r.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::invalid(format!("probability row {i} leaves [0, 1]")));
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("probability row {i} sums to {s}")));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { data, cols })
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.cols.max(1)
    }

    pub fn class_count(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }
}

/// Per-class one-vs-rest calibrators plus the prior fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCalibrator {
    pub method: CalibrationMethod,
    pub columns: Vec<Calibrator>,
    pub fallback_priors: PriorVector,
}

impl MatrixCalibrator {
    pub fn fit(
        train_scores: &ScoreMatrix,
        train_labels: &[usize],
        method: CalibrationMethod,
    ) -> Result<Self> {
        train_scores.check_labels(train_labels)?;
        let c = train_scores.class_count();
        let fallback_priors = empirical_priors(train_labels, c)?;
        let columns = (0..c)
            .map(|j| {
                let targets: Vec<bool> = train_labels.iter().map(|&y| y == j).collect();
                Calibrator::fit(method, &train_scores.column(j), &targets)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            method,
            columns,
            fallback_priors,
        })
    }

    pub fn apply(&self, scores: &ScoreMatrix) -> Result<ProbabilityMatrix> {
        let c = self.columns.len();
        if scores.class_count() != c {
            return Err(Error::dims(format!(
                "calibrator has {c} columns, scores have {}",
                scores.class_count()
            )));
        }
        let per_column = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, cal)| cal.apply(&scores.column(j)))
            .collect::<Result<Vec<_>>>()?;
        let n = scores.n_rows();
        let mut data = Vec::with_capacity(n * c);
        for i in 0..n {
            let row: Vec<f64> = per_column.iter().map(|col| col[i].clamp(0.0, 1.0)).collect();
            let sum: f64 = row.iter().sum();
            if sum < DEGENERATE_ROW_SUM {
                data.extend_from_slice(self.fallback_priors.as_slice());
            } else {
                data.extend(row.iter().map(|p| p / sum));
            }
        }
        Ok(ProbabilityMatrix { data, cols: c })
    }
}

/// Fits one-vs-rest calibrators on the training split and returns
/// normalized posteriors for the test split.
pub fn calibrate_matrix(
    train_scores: &ScoreMatrix,
    train_labels: &[usize],
    test_scores: &ScoreMatrix,
    method: CalibrationMethod,
) -> Result<ProbabilityMatrix> {
    MatrixCalibrator::fit(train_scores, train_labels, method)?.apply(test_scores)
}

/// Minimum expected cost decision: for each row picks the predicted class
/// i minimizing `sum_j p[j] * Cost(j, i)` (j is the true class). Ties go to
/// the lowest index.
pub fn bayes_decide(probs: &ProbabilityMatrix, costs: &CostMatrix) -> Result<LabelAssignment> {
    let c = costs.class_count();
    if probs.class_count() != c {
        return Err(Error::dims(format!(
            "probabilities over {} classes, cost matrix has {c}",
            probs.class_count()
        )));
    }
    let predictions = probs
        .rows()
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for i in 0..c {
                let risk: f64 = (0..c).map(|j| p[j] * costs.cost(j, i)).sum();
                if risk < best.1 {
                    best = (i, risk);
                }
            }
            best.0
        })
        .collect();
    Ok(LabelAssignment::from_raw(predictions, c))
}
