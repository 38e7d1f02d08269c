//! Platt sigmoid calibration, `p = 1 / (1 + exp(A*s + B))`.
//!
//! Fitted with Newton's method plus backtracking line search on the convex
//! regularized-target cross-entropy (Lin, Lin and Weng's formulation). All
//! log terms are evaluated in a form that cannot overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattParams {
    pub a: f64,
    pub b: f64,
}

/// Smoothed targets replacing the 0/1 labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlattTargets {
    pub t_pos: f64,
    pub t_neg: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl PlattTargets {
    pub fn from_labels(labels: &[bool]) -> Result<Self> {
        let n_pos = labels.iter().filter(|&&y| y).count();
        let n_neg = labels.len() - n_pos;
        if n_pos == 0 || n_neg == 0 {
            return Err(Error::invalid(
                "Platt fitting needs both positive and negative instances",
            ));
        }
        Ok(Self {
            t_pos: (n_pos as f64 + 1.0) / (n_pos as f64 + 2.0),
            t_neg: 1.0 / (n_neg as f64 + 2.0),
            n_pos,
            n_neg,
        })
    }

    fn target(&self, positive: bool) -> f64 {
        if positive {
            self.t_pos
        } else {
            self.t_neg
        }
    }
}

/// Newton iteration limits.
const MAX_ITER: usize = 200;
const MIN_STEP: f64 = 1e-10;
/// Hessian ridge; keeps the 2x2 system solvable on degenerate inputs.
const SIGMA: f64 = 1e-12;
const GRAD_TOL: f64 = 1e-8;
const DECREASE_TOL: f64 = 1e-12;

fn check_inputs(scores: &[f64], labels: &[bool]) -> Result<PlattTargets> {
    if scores.len() != labels.len() {
        return Err(Error::dims(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("Platt scores must be finite"));
    }
    PlattTargets::from_labels(labels)
}

/// `t*z + log(1 + exp(-z))` rearranged by the sign of `z`; this is the
/// per-instance loss with `z = A*s + B`.
#[inline]
fn instance_loss(z: f64, t: f64) -> f64 {
    if z >= 0.0 {
        t * z + (-z).exp().ln_1p()
    } else {
        (t - 1.0) * z + z.exp().ln_1p()
    }
}

/// Returns `(p, 1 - p)` for `p = 1 / (1 + exp(z))` without cancellation.
#[inline]
fn sigmoid_pair(z: f64) -> (f64, f64) {
    if z >= 0.0 {
        let e = (-z).exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    } else {
        let e = z.exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    }
}

/// The cross-entropy `F(A, B)` minimized by [`fit_platt`].
pub fn platt_objective(scores: &[f64], labels: &[bool], params: PlattParams) -> Result<f64> {
    let targets = check_inputs(scores, labels)?;
    Ok(objective(scores, labels, &targets, params))
}

fn objective(scores: &[f64], labels: &[bool], targets: &PlattTargets, p: PlattParams) -> f64 {
    scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| instance_loss(p.a * s + p.b, targets.target(y)))
        .sum()
}

/// Analytic gradient `(dF/dA, dF/dB)`.
pub fn platt_gradient(scores: &[f64], labels: &[bool], params: PlattParams) -> Result<[f64; 2]> {
    let targets = check_inputs(scores, labels)?;
    let (g, _) = derivatives(scores, labels, &targets, params);
    Ok(g)
}

fn derivatives(
    scores: &[f64],
    labels: &[bool],
    targets: &PlattTargets,
    params: PlattParams,
) -> ([f64; 2], [f64; 3]) {
    let (mut g1, mut g2) = (0.0, 0.0);
    let (mut h11, mut h22, mut h21) = (SIGMA, SIGMA, 0.0);
    for (&s, &y) in scores.iter().zip(labels) {
        let (p, q) = sigmoid_pair(params.a * s + params.b);
        let d2 = p * q;
        h11 += s * s * d2;
        h22 += d2;
        h21 += s * d2;
        let d1 = targets.target(y) - p;
        g1 += s * d1;
        g2 += d1;
    }
    ([g1, g2], [h11, h22, h21])
}

/// Fits `(A, B)` on binary labels (`true` = positive class).
pub fn fit_platt(scores: &[f64], labels: &[bool]) -> Result<PlattParams> {
    let targets = check_inputs(scores, labels)?;
    let mut params = PlattParams {
        a: 0.0,
        b: ((targets.n_neg as f64 + 1.0) / (targets.n_pos as f64 + 1.0)).ln(),
    };
    let mut fval = objective(scores, labels, &targets, params);

    for _ in 0..MAX_ITER {
        let ([g1, g2], [h11, h22, h21]) = derivatives(scores, labels, &targets, params);
        if g1.hypot(g2) <= GRAD_TOL {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        if !(da.is_finite() && db.is_finite()) {
            return Err(Error::Numerical("singular Platt Hessian".into()));
        }

        let mut step = 1.0;
        let mut accepted = None;
        while step >= MIN_STEP {
            let trial = PlattParams {
                a: params.a + step * da,
                b: params.b + step * db,
            };
            let f = objective(scores, labels, &targets, trial);
            if f < fval + 1e-4 * step * gd {
                accepted = Some((trial, f));
                break;
            }
            step /= 2.0;
        }
        // A failed line search means no representable descent remains.
        let Some((trial, f)) = accepted else { break };
        let decrease = fval - f;
        params = trial;
        fval = f;
        if decrease < DECREASE_TOL {
            break;
        }
    }
    if !(params.a.is_finite() && params.b.is_finite() && fval.is_finite()) {
        return Err(Error::Numerical("Platt fit diverged".into()));
    }
    Ok(params)
}

/// Elementwise `1 / (1 + exp(A*s + B))`.
pub fn apply_platt(params: PlattParams, scores: &[f64]) -> Result<Vec<f64>> {
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("Platt scores must be finite"));
    }
    Ok(scores
        .iter()
        .map(|&s| sigmoid_pair(params.a * s + params.b).0)
        .collect())
}
