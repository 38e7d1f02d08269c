//! One interface over every conversion method: fit on training scores,
//! then decide on new scores.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calibration::{bayes_decide, CalibrationMethod, MatrixCalibrator};
use crate::data::{CostMatrix, LabelAssignment, ScoreMatrix};
use crate::error::{Error, Result};
use crate::reopt::{
    ga_optimize, lf_optimize, metaclass_optimize, raw_decide, weighted_decide, GaConfig,
    MetaClassTree, WeightVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Raw,
    Lf,
    Metaclass,
    Ga,
    Platt,
    Pav,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Raw,
        Method::Lf,
        Method::Metaclass,
        Method::Ga,
        Method::Platt,
        Method::Pav,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Raw => "raw",
            Method::Lf => "lf",
            Method::Metaclass => "metaclass",
            Method::Ga => "ga",
            Method::Platt => "platt",
            Method::Pav => "pav",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown method '{s}' (expected raw, lf, metaclass, ga, platt or pav)"
                ))
            })
    }
}

/// A fitted conversion from scores to labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum FittedModel {
    Raw {
        class_count: usize,
    },
    /// LF or GA weight vector.
    Weights {
        method: Method,
        weights: WeightVector,
    },
    Metaclass {
        tree: MetaClassTree,
    },
    Calibrated {
        calibrator: MatrixCalibrator,
    },
}

impl FittedModel {
    pub fn method(&self) -> Method {
        match self {
            FittedModel::Raw { .. } => Method::Raw,
            FittedModel::Weights { method, .. } => *method,
            FittedModel::Metaclass { .. } => Method::Metaclass,
            FittedModel::Calibrated { calibrator } => match calibrator.method {
                CalibrationMethod::Platt => Method::Platt,
                CalibrationMethod::Pav => Method::Pav,
            },
        }
    }

    pub fn class_count(&self) -> usize {
        match self {
            FittedModel::Raw { class_count } => *class_count,
            FittedModel::Weights { weights, .. } => weights.len(),
            FittedModel::Metaclass { tree } => tree.classes().len(),
            FittedModel::Calibrated { calibrator } => calibrator.columns.len(),
        }
    }

    /// Labels for `scores`. Re-optimized models carry their cost matrix in
    /// the fitted parameters, so `costs` only matters for calibrated ones;
    /// its size is checked either way.
    pub fn decide(&self, scores: &ScoreMatrix, costs: &CostMatrix) -> Result<LabelAssignment> {
        let c = self.class_count();
        if scores.class_count() != c || costs.class_count() != c {
            return Err(Error::dims(format!(
                "model has {c} classes, scores {}, costs {}",
                scores.class_count(),
                costs.class_count()
            )));
        }
        match self {
            FittedModel::Raw { .. } => Ok(raw_decide(scores)),
            FittedModel::Weights { weights, .. } => weighted_decide(scores, weights),
            FittedModel::Metaclass { tree } => tree.decide(scores),
            FittedModel::Calibrated { calibrator } => bayes_decide(&calibrator.apply(scores)?, costs),
        }
    }
}

/// Fits `method` on training scores. `seed` is used by GA only.
pub fn fit_method(
    method: Method,
    scores: &ScoreMatrix,
    labels: &[usize],
    costs: &CostMatrix,
    ga: &GaConfig,
    seed: u64,
) -> Result<FittedModel> {
    if costs.class_count() != scores.class_count() {
        return Err(Error::dims(format!(
            "cost matrix has {} classes, scores have {}",
            costs.class_count(),
            scores.class_count()
        )));
    }
    Ok(match method {
        Method::Raw => FittedModel::Raw {
            class_count: scores.class_count(),
        },
        Method::Lf => FittedModel::Weights {
            method,
            weights: lf_optimize(scores, labels, costs)?,
        },
        Method::Ga => FittedModel::Weights {
            method,
            weights: ga_optimize(scores, labels, costs, ga, seed)?,
        },
        Method::Metaclass => FittedModel::Metaclass {
            tree: metaclass_optimize(scores, labels, costs)?,
        },
        Method::Platt | Method::Pav => {
            let cal = if method == Method::Platt {
                CalibrationMethod::Platt
            } else {
                CalibrationMethod::Pav
            };
            FittedModel::Calibrated {
                calibrator: MatrixCalibrator::fit(scores, labels, cal)?,
            }
        }
    })
}
