//! Validated domain types shared by every other module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature vectors with dense 0-based class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    feature_count: usize,
    labels: Vec<usize>,
    class_count: usize,
    class_names: Vec<String>,
}

impl LabeledDataset {
    /// Builds a dataset from row-major features. Class names default to the
    /// decimal index when `class_names` is empty.
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_count: usize,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n = labels.len();
        if features.len() != n {
            return Err(Error::dims(format!(
                "{} feature rows but {} labels",
                features.len(),
                n
            )));
        }
        let feature_count = features.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(n * feature_count);
        for (i, row) in features.iter().enumerate() {
            if row.len() != feature_count {
                return Err(Error::dims(format!(
                    "row {i} has {} features, expected {feature_count}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "row {i}, feature {j} is not a finite number"
                )));
            }
            flat.extend_from_slice(row);
        }
        validate_labels(&labels, class_count)?;
        let class_names = if class_names.is_empty() {
            (0..class_count).map(|c| c.to_string()).collect()
        } else if class_names.len() == class_count {
            class_names
        } else {
            return Err(Error::dims(format!(
                "{} class names for {class_count} classes",
                class_names.len()
            )));
        };
        Ok(Self {
            features: flat,
            feature_count,
            labels,
            class_count,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_count..(i + 1) * self.feature_count]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks(self.feature_count.max(1)).take(self.len())
    }

    /// Rows at `indices`, in that order, keeping the class encoding. Fails
    /// if some class is left without instances.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&i) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::invalid(format!("row index {i} out of range")));
        }
        let mut features = Vec::with_capacity(indices.len() * self.feature_count);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let labels: Vec<usize> = indices.iter().map(|&i| self.labels[i]).collect();
        validate_labels(&labels, self.class_count)?;
        Ok(Self {
            features,
            feature_count: self.feature_count,
            labels,
            class_count: self.class_count,
            class_names: self.class_names.clone(),
        })
    }
}

/// Checks `n >= c >= 2`, every label in range and every class present.
pub fn validate_labels(labels: &[usize], class_count: usize) -> Result<()> {
    if class_count < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 classes, got {class_count}"
        )));
    }
    if labels.len() < class_count {
        return Err(Error::invalid(format!(
            "{} instances cannot cover {class_count} classes",
            labels.len()
        )));
    }
    let counts = class_counts(labels, class_count)?;
    if let Some(empty) = counts.iter().position(|&k| k == 0) {
        return Err(Error::invalid(format!("class {empty} has no instances")));
    }
    Ok(())
}

/// Per-class instance counts; errors on an out-of-range label.
pub fn class_counts(labels: &[usize], class_count: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; class_count];
    for (i, &y) in labels.iter().enumerate() {
        if y >= class_count {
            return Err(Error::invalid(format!(
                "label {y} at position {i} is outside [0, {class_count})"
            )));
        }
        counts[y] += 1;
    }
    Ok(counts)
}

/// Dense n x c matrix of per-instance, per-class confidence scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl ScoreMatrix {
    pub fn from_row_major(data: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if cols == 0 {
            return Err(Error::invalid("score matrix needs at least one column"));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "score at row {}, column {} is not finite",
                k / cols,
                k % cols
            )));
        }
        Ok(Self { data, rows, cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::dims(format!(
                "row {i} has {} columns, expected {cols}",
                rows[i].len()
            )));
        }
        Self::from_row_major(rows.concat(), rows.len(), cols)
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn class_count(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> ScoreMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        ScoreMatrix {
            data,
            rows: indices.len(),
            cols: self.cols,
        }
    }

    /// Plain argmax per row, ties to the lowest class index.
    pub fn argmax(&self) -> LabelAssignment {
        let predictions = self.rows().map(argmax_lowest).collect();
        LabelAssignment {
            predictions,
            class_count: self.cols,
        }
    }

    pub(crate) fn check_labels(&self, labels: &[usize]) -> Result<()> {
        if labels.len() != self.rows {
            return Err(Error::dims(format!(
                "{} labels for {} score rows",
                labels.len(),
                self.rows
            )));
        }
        Ok(())
    }
}

/// Index of the maximum, first index on ties.
pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = j;
        }
    }
    best
}

/// c x c misclassification costs; entry (i, j) is the cost of predicting
/// class j for an instance whose true class is i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CostMatrixRepr", into = "CostMatrixRepr")]
pub struct CostMatrix {
    costs: Vec<f64>,
    size: usize,
}

#[derive(Serialize, Deserialize)]
struct CostMatrixRepr {
    costs: Vec<Vec<f64>>,
}

impl TryFrom<CostMatrixRepr> for CostMatrix {
    type Error = Error;

    fn try_from(repr: CostMatrixRepr) -> Result<Self> {
        CostMatrix::from_rows(&repr.costs)
    }
}

impl From<CostMatrix> for CostMatrixRepr {
    fn from(m: CostMatrix) -> Self {
        CostMatrixRepr {
            costs: m.costs.chunks(m.size).map(<[f64]>::to_vec).collect(),
        }
    }
}

impl CostMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let size = rows.len();
        if size < 2 {
            return Err(Error::invalid("cost matrix needs at least 2 classes"));
        }
        let mut costs = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::dims(format!(
                    "cost row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if i == j && v != 0.0 {
                    return Err(Error::invalid(format!(
                        "diagonal cost ({i},{i}) must be 0, got {v}"
                    )));
                }
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(format!(
                        "cost ({i},{j}) must be finite and non-negative, got {v}"
                    )));
                }
            }
            costs.extend_from_slice(row);
        }
        Ok(Self { costs, size })
    }

    pub fn class_count(&self) -> usize {
        self.size
    }

    /// Cost of predicting `predicted` for an instance of class `actual`.
    #[inline]
    pub fn cost(&self, actual: usize, predicted: usize) -> f64 {
        self.costs[actual * self.size + predicted]
    }

    pub fn row(&self, actual: usize) -> &[f64] {
        &self.costs[actual * self.size..(actual + 1) * self.size]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.costs.chunks(self.size).map(<[f64]>::to_vec).collect()
    }

    /// Every entry multiplied by `factor` (must be positive).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid(format!("scale factor {factor} must be positive")));
        }
        Ok(Self {
            costs: self.costs.iter().map(|c| c * factor).collect(),
            size: self.size,
        })
    }
}

/// Class prior probabilities; strictly positive and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriorVector(Vec<f64>);

impl PriorVector {
    pub fn new(priors: Vec<f64>) -> Result<Self> {
        if priors.len() < 2 {
            return Err(Error::invalid("need priors for at least 2 classes"));
        }
        if let Some(i) = priors.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::invalid(format!(
                "prior {i} must be positive, got {}",
                priors[i]
            )));
        }
        let sum: f64 = priors.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("priors sum to {sum}, not 1")));
        }
        Ok(Self(priors))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn class_count(&self) -> usize {
        self.0.len()
    }
}

/// `priors[i] = count(i) / n`.
pub fn empirical_priors(labels: &[usize], class_count: usize) -> Result<PriorVector> {
    let counts = class_counts(labels, class_count)?;
    if let Some(empty) = counts.iter().position(|&k| k == 0) {
        return Err(Error::invalid(format!(
            "class {empty} has no instances; its prior is undefined"
        )));
    }
    let n = labels.len() as f64;
    PriorVector::new(counts.iter().map(|&k| k as f64 / n).collect())
}

/// Discrete classifier output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelAssignment {
    predictions: Vec<usize>,
    class_count: usize,
}

impl LabelAssignment {
    pub fn new(predictions: Vec<usize>, class_count: usize) -> Result<Self> {
        class_counts(&predictions, class_count)?;
        Ok(Self {
            predictions,
            class_count,
        })
    }

    pub fn predictions(&self) -> &[usize] {
        &self.predictions
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    pub(crate) fn from_raw(predictions: Vec<usize>, class_count: usize) -> Self {
        debug_assert!(predictions.iter().all(|&p| p < class_count));
        Self {
            predictions,
            class_count,
        }
    }
}
