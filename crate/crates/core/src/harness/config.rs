use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::costgen::DEFAULT_SCALE;
use crate::error::{Error, Result};
use crate::model::Method;
use crate::reopt::GaConfig;
use crate::synthetic::SyntheticSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetSource {
    /// Feature table scored by the built-in naive Bayes model.
    Csv {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        path: PathBuf,
        label_column: String,
    },
    /// Precomputed score matrix with one label per line.
    Scores {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        scores: PathBuf,
        labels: PathBuf,
    },
    Synthetic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        spec: SyntheticSpec,
    },
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}

impl DatasetSource {
    pub fn name(&self, index: usize) -> String {
        match self {
            DatasetSource::Csv { name: Some(n), .. }
            | DatasetSource::Scores { name: Some(n), .. }
            | DatasetSource::Synthetic { name: Some(n), .. } => n.clone(),
            DatasetSource::Csv { path, .. } => stem(path),
            DatasetSource::Scores { scores, .. } => stem(scores),
            DatasetSource::Synthetic { .. } => format!("synthetic{index}"),
        }
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match self {
            DatasetSource::Csv { path, .. } => fix(path),
            DatasetSource::Scores { scores, labels, .. } => {
                fix(scores);
                fix(labels);
            }
            DatasetSource::Synthetic { .. } => {}
        }
    }
}

fn default_runs() -> usize {
    20
}
fn default_folds() -> usize {
    5
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_scale() -> f64 {
    DEFAULT_SCALE
}
fn default_noise() -> Vec<f64> {
    vec![0.0]
}
fn default_alpha() -> f64 {
    0.05
}

/// Experiment description, normally read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSource>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_scale")]
    pub cost_scale: f64,
    /// Master seed; every random stream is derived from it.
    pub seed: u64,
    #[serde(default)]
    pub ga: GaConfig,
    /// Naive Bayes variance floor; `None` picks one from each training
    /// split's feature variances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nb_epsilon: Option<f64>,
    /// One score variant per level. Level `l` replaces scores `s` by
    /// `(1 - l) * s + l * u` with `u` uniform on `[0, 1)`; 0 leaves them
    /// untouched.
    #[serde(default = "default_noise")]
    pub noise_levels: Vec<f64>,
    /// Significance level for the Holm comparisons in the report.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl ExperimentConfig {
    /// Reads a config file; relative dataset paths are taken relative to
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg: ExperimentConfig = crate::io::read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut cfg.datasets {
            d.resolve(base);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(format!("experiment config: {m}")));
        if self.datasets.is_empty() {
            return bad("no datasets".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.methods.is_empty() {
            return bad("no methods".into());
        }
        let mut sorted = self.methods.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.methods.len() {
            return bad("methods listed more than once".into());
        }
        if !(self.cost_scale > 0.0 && self.cost_scale.is_finite()) {
            return bad(format!("cost scale must be positive, got {}", self.cost_scale));
        }
        if let Some(e) = self.nb_epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return bad(format!("nb_epsilon must be positive, got {e}"));
            }
        }
        if self.noise_levels.is_empty() {
            return bad("noise_levels must list at least one level".into());
        }
        if let Some(l) = self.noise_levels.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return bad(format!("noise level {l} outside [0, 1]"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        self.ga.validate()?;
        for (i, d) in self.datasets.iter().enumerate() {
            if let DatasetSource::Synthetic { spec, .. } = d {
                spec.validate()
                    .map_err(|e| Error::invalid(format!("dataset {i}: {e}")))?;
            }
        }
        let mut names: Vec<String> = self.datasets.iter().enumerate().map(|(i, d)| d.name(i)).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("dataset names must be unique".into());
        }
        Ok(())
    }
}
