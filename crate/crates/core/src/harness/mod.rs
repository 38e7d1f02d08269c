//! Repeated stratified cross-validation over datasets, score variants and
//! conversion methods.
//!
//! Per dataset and run one cost matrix is drawn from the full-data priors.
//! Each fold fits the base scorer on its training split, and every method
//! is then fitted on the training scores and evaluated on the test scores.
//! Work units run in parallel; every random stream is derived from the
//! master seed and the unit's coordinates, so the report does not depend
//! on scheduling.

mod config;
mod folds;
mod report;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{default_variance_floor, fit_nb};
use crate::costgen::{generate_cost_matrix, CostGenConfig};
use crate::data::{empirical_priors, CostMatrix, LabeledDataset, ScoreMatrix};
use crate::error::{Error, Result};
use crate::io::{load_dataset, load_labels, load_score_matrix, DatasetSchema};
use crate::metrics::{accuracy, mauc, total_cost};
use crate::model::{fit_method, Method};
use crate::reopt::raw_decide;
use crate::rng::{derive_seed, stream, Rng as StreamRng};
use crate::synthetic;

pub use config::{DatasetSource, ExperimentConfig};
pub use folds::{stratified_folds, Fold, StratifiedFolds};
pub use report::{
    emit_report, Aggregate, CorrelationRow, ExperimentReport, ReductionRow, ReportFormat,
};

/// What one (dataset, variant, run, fold, method) cell measured. Costs
/// are per instance. `mauc` and `accuracy` describe the (possibly
/// degraded) raw test scores and are shared by all methods of the fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub dataset: usize,
    pub variant: usize,
    pub run: usize,
    pub fold: usize,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_cost_total: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mauc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CellRecord {
    fn empty(dataset: usize, variant: usize, run: usize, fold: usize, method: Method) -> Self {
        Self {
            dataset,
            variant,
            run,
            fold,
            method,
            train_cost: None,
            test_cost: None,
            test_cost_total: None,
            method_accuracy: None,
            mauc: None,
            accuracy: None,
            error: None,
        }
    }
}

/// The cost matrix shared by every fold and method of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: usize,
    pub run: usize,
    pub cost_seed: u64,
    pub fold_seed: u64,
    pub costs: CostMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub instances: usize,
    pub classes: usize,
    pub class_names: Vec<String>,
    pub priors: Vec<f64>,
}

enum Loaded {
    Features(LabeledDataset),
    Scores {
        scores: ScoreMatrix,
        labels: Vec<usize>,
    },
}

impl Loaded {
    fn labels(&self) -> &[usize] {
        match self {
            Loaded::Features(d) => d.labels(),
            Loaded::Scores { labels, .. } => labels,
        }
    }

    fn class_count(&self) -> usize {
        match self {
            Loaded::Features(d) => d.class_count(),
            Loaded::Scores { scores, .. } => scores.class_count(),
        }
    }

    fn class_names(&self) -> Vec<String> {
        match self {
            Loaded::Features(d) => d.class_names().to_vec(),
            Loaded::Scores { scores, .. } => (0..scores.class_count()).map(|j| j.to_string()).collect(),
        }
    }

    /// Training and test score matrices for one fold.
    fn fold_scores(&self, fold: &Fold, nb_epsilon: Option<f64>) -> Result<(ScoreMatrix, ScoreMatrix)> {
        match self {
            Loaded::Features(d) => {
                let train = d.subset(&fold.train)?;
                let eps = nb_epsilon.unwrap_or_else(|| default_variance_floor(&train));
                let model = fit_nb(&train, eps)?;
                Ok((
                    model.score_rows(train.rows())?,
                    model.score_rows(fold.test.iter().map(|&i| d.row(i)))?,
                ))
            }
            Loaded::Scores { scores, .. } => Ok((scores.select_rows(&fold.train), scores.select_rows(&fold.test))),
        }
    }
}

fn load_source(source: &DatasetSource, index: usize, master: u64) -> Result<Loaded> {
    match source {
        DatasetSource::Csv {
            path, label_column, ..
        } => Ok(Loaded::Features(load_dataset(path, &DatasetSchema::new(label_column.clone()))?)),
        DatasetSource::Scores { scores, labels, .. } => {
            let s = load_score_matrix(scores)?;
            let y = load_labels(labels)?;
            s.check_labels(&y)?;
            crate::data::validate_labels(&y, s.class_count())?;
            Ok(Loaded::Scores { scores: s, labels: y })
        }
        DatasetSource::Synthetic { spec, .. } => Ok(Loaded::Features(synthetic::generate(
            spec,
            derive_seed(master, &[stream::SYNTHETIC, index as u64]),
        )?)),
    }
}

/// Mixes each score with uniform noise: `(1 - level) * s + level * u`.
pub fn degrade_scores(scores: &ScoreMatrix, level: f64, rng: &mut impl Rng) -> Result<ScoreMatrix> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::invalid(format!("noise level {level} outside [0, 1]")));
    }
    let data = scores
        .as_slice()
        .iter()
        .map(|&s| (1.0 - level) * s + level * rng.random::<f64>())
        .collect();
    ScoreMatrix::from_row_major(data, scores.n_rows(), scores.class_count())
}

struct Unit<'a> {
    dataset: usize,
    run: usize,
    fold_index: usize,
    fold: &'a Fold,
    costs: &'a CostMatrix,
}

fn pick<T: Clone>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i].clone()).collect()
}

fn run_unit(cfg: &ExperimentConfig, data: &Loaded, unit: &Unit) -> Vec<CellRecord> {
    let labels = data.labels();
    let train_labels = pick(labels, &unit.fold.train);
    let test_labels = pick(labels, &unit.fold.test);
    let base = data.fold_scores(unit.fold, cfg.nb_epsilon);
    let mut out = Vec::with_capacity(cfg.noise_levels.len() * cfg.methods.len());
    for (v, &level) in cfg.noise_levels.iter().enumerate() {
        let new_cell = |m| CellRecord::empty(unit.dataset, v, unit.run, unit.fold_index, m);
        let scores = base.as_ref().map_err(|e| e.to_string()).and_then(|(tr, te)| {
            if level == 0.0 {
                return Ok((tr.clone(), te.clone()));
            }
            let path = [stream::NOISE, unit.dataset as u64, v as u64, unit.run as u64, unit.fold_index as u64];
            let mut rng: StreamRng = crate::rng::sub_rng(cfg.seed, &path);
            let tr = degrade_scores(tr, level, &mut rng).map_err(|e| e.to_string())?;
            let te = degrade_scores(te, level, &mut rng).map_err(|e| e.to_string())?;
            Ok((tr, te))
        });
        let (train, test) = match scores {
            Ok(s) => s,
            Err(msg) => {
                out.extend(cfg.methods.iter().map(|&m| CellRecord {
                    error: Some(format!("base scores: {msg}")),
                    ..new_cell(m)
                }));
                continue;
            }
        };
        let fold_mauc = mauc(&test, &test_labels).ok();
        let fold_accuracy = accuracy(&raw_decide(&test), &test_labels).ok();
        for &method in &cfg.methods {
            let ga_seed = derive_seed(
                cfg.seed,
                &[stream::GA, unit.dataset as u64, v as u64, unit.run as u64, unit.fold_index as u64],
            );
            let cell = (|| -> Result<CellRecord> {
                let model = fit_method(method, &train, &train_labels, unit.costs, &cfg.ga, ga_seed)?;
                let train_pred = model.decide(&train, unit.costs)?;
                let test_pred = model.decide(&test, unit.costs)?;
                let tr = total_cost(&train_pred, &train_labels, unit.costs)?;
                let te = total_cost(&test_pred, &test_labels, unit.costs)?;
                Ok(CellRecord {
                    train_cost: Some(tr.per_instance),
                    test_cost: Some(te.per_instance),
                    test_cost_total: Some(te.total),
                    method_accuracy: Some(accuracy(&test_pred, &test_labels)?),
                    ..new_cell(method)
                })
            })();
            let mut cell = cell.unwrap_or_else(|e| CellRecord {
                error: Some(e.to_string()),
                ..new_cell(method)
            });
            cell.mauc = fold_mauc;
            cell.accuracy = fold_accuracy;
            out.push(cell);
        }
    }
    out
}

/// Runs the whole experiment. Failures inside a cell are recorded in that
/// cell; only configuration and loading problems abort the run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let loaded: Vec<Loaded> = config
        .datasets
        .iter()
        .enumerate()
        .map(|(i, src)| {
            load_source(src, i, config.seed)
                .map_err(|e| Error::invalid(format!("dataset '{}': {e}", src.name(i))))
        })
        .collect::<Result<_>>()?;

    let mut datasets = Vec::with_capacity(loaded.len());
    let mut runs = Vec::new();
    let mut splits = Vec::new();
    let mut warnings = Vec::new();
    for (d, data) in loaded.iter().enumerate() {
        let labels = data.labels();
        let priors = empirical_priors(labels, data.class_count())?;
        let name = config.datasets[d].name(d);
        for r in 0..config.runs {
            let cost_seed = derive_seed(config.seed, &[stream::COST, d as u64, r as u64]);
            let fold_seed = derive_seed(config.seed, &[stream::FOLDS, d as u64, r as u64]);
            let costs = generate_cost_matrix(&priors, &CostGenConfig::new(config.cost_scale, cost_seed)?)?;
            let split = stratified_folds(labels, config.folds, fold_seed)
                .map_err(|e| Error::invalid(format!("dataset '{name}': {e}")))?;
            if r == 0 && !split.training_only.is_empty() {
                warnings.push(format!(
                    "dataset '{name}': classes {:?} have a single instance and are never tested",
                    split.training_only
                ));
            }
            runs.push(RunRecord {
                dataset: d,
                run: r,
                cost_seed,
                fold_seed,
                costs,
            });
            splits.push(split);
        }
        datasets.push(DatasetSummary {
            name,
            instances: labels.len(),
            classes: data.class_count(),
            class_names: data.class_names(),
            priors: priors.as_slice().to_vec(),
        });
    }

    let units: Vec<Unit> = runs
        .iter()
        .zip(&splits)
        .flat_map(|(run, split)| {
            split.folds.iter().enumerate().map(move |(f, fold)| Unit {
                dataset: run.dataset,
                run: run.run,
                fold_index: f,
                fold,
                costs: &run.costs,
            })
        })
        .collect();
    let mut cells: Vec<CellRecord> = units
        .par_iter()
        .flat_map_iter(|u| run_unit(config, &loaded[u.dataset], u))
        .collect();
    cells.sort_by_key(|c| (c.dataset, c.variant, c.run, c.fold, c.method));
    Ok(report::assemble(config.clone(), datasets, runs, cells, warnings))
}
