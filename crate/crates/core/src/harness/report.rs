use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Method;
use crate::stats::{compare_methods, reduction_summary, spearman, Direction, MethodComparison, ReductionSummary, ResultsTable};

use super::{CellRecord, DatasetSummary, ExperimentConfig, RunRecord};

/// Means over the successful cells of one (dataset, variant, method).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub dataset: usize,
    pub variant: usize,
    pub method: Method,
    pub cells: usize,
    pub errors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mauc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

/// Relative test-cost reduction of one method against Raw over all
/// datasets, for one score variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionRow {
    pub variant: usize,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<ReductionSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Spearman correlation, across score variants, between the raw-score
/// MAUC (or accuracy) and a method's mean test cost on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub dataset: usize,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mauc_vs_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy_vs_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub datasets: Vec<DatasetSummary>,
    pub runs: Vec<RunRecord>,
    pub cells: Vec<CellRecord>,
    pub aggregates: Vec<Aggregate>,
    pub reductions: Vec<ReductionRow>,
    pub correlations: Vec<CorrelationRow>,
    /// Friedman/Holm over datasets x methods mean test cost, variant 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_ranking: Option<MethodComparison>,
    /// Friedman/Holm over datasets x correlation columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation_ranking: Option<MethodComparison>,
    pub warnings: Vec<String>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (mut s, mut k) = (0.0, 0usize);
    for v in values.flatten() {
        s += v;
        k += 1;
    }
    (k > 0).then(|| s / k as f64)
}

pub(super) fn assemble(
    config: ExperimentConfig,
    datasets: Vec<DatasetSummary>,
    runs: Vec<RunRecord>,
    cells: Vec<CellRecord>,
    warnings: Vec<String>,
) -> ExperimentReport {
    let mut aggregates = Vec::new();
    for d in 0..datasets.len() {
        for v in 0..config.noise_levels.len() {
            for &m in &config.methods {
                let group: Vec<&CellRecord> = cells
                    .iter()
                    .filter(|c| c.dataset == d && c.variant == v && c.method == m)
                    .collect();
                let ok: Vec<&&CellRecord> = group.iter().filter(|c| c.error.is_none()).collect();
                aggregates.push(Aggregate {
                    dataset: d,
                    variant: v,
                    method: m,
                    cells: ok.len(),
                    errors: group.len() - ok.len(),
                    train_cost: mean(ok.iter().map(|c| c.train_cost)),
                    test_cost: mean(ok.iter().map(|c| c.test_cost)),
                    method_accuracy: mean(ok.iter().map(|c| c.method_accuracy)),
                    mauc: mean(group.iter().map(|c| c.mauc)),
                    accuracy: mean(group.iter().map(|c| c.accuracy)),
                });
            }
        }
    }
    let mut report = ExperimentReport {
        config,
        datasets,
        runs,
        cells,
        aggregates,
        reductions: Vec::new(),
        correlations: Vec::new(),
        cost_ranking: None,
        correlation_ranking: None,
        warnings,
    };
    report.reductions = reductions(&report);
    report.correlations = correlations(&report);
    report.cost_ranking = report
        .cost_table(0)
        .and_then(|t| compare_methods(&t, Direction::Lower, report.config.alpha).ok());
    report.correlation_ranking = correlation_table(&report)
        .and_then(|t| compare_methods(&t, Direction::Lower, report.config.alpha).ok());
    report
}

fn reductions(report: &ExperimentReport) -> Vec<ReductionRow> {
    let cfg = &report.config;
    if !cfg.methods.contains(&Method::Raw) {
        return Vec::new();
    }
    let mut rows = Vec::new();
    for v in 0..cfg.noise_levels.len() {
        let raw: Vec<Option<f64>> = (0..report.datasets.len())
            .map(|d| report.aggregate(d, v, Method::Raw).and_then(|a| a.test_cost))
            .collect();
        for &m in cfg.methods.iter().filter(|&&m| m != Method::Raw) {
            let other: Vec<Option<f64>> = (0..report.datasets.len())
                .map(|d| report.aggregate(d, v, m).and_then(|a| a.test_cost))
                .collect();
            let pairs: Option<(Vec<f64>, Vec<f64>)> =
                raw.iter().zip(&other).map(|(a, b)| Some(((*a)?, (*b)?))).collect::<Option<Vec<_>>>().map(|p| p.into_iter().unzip());
            let (summary, note) = match pairs {
                None => (None, Some("some datasets have no successful cells".to_string())),
                Some((r, o)) => match reduction_summary(&r, &o) {
                    Ok(s) => (Some(s), None),
                    Err(e) => (None, Some(e.to_string())),
                },
            };
            rows.push(ReductionRow {
                variant: v,
                method: m,
                summary,
                note,
            });
        }
    }
    rows
}

fn correlations(report: &ExperimentReport) -> Vec<CorrelationRow> {
    let cfg = &report.config;
    if cfg.noise_levels.len() < 2 {
        return Vec::new();
    }
    let mut rows = Vec::new();
    for d in 0..report.datasets.len() {
        for &m in &cfg.methods {
            let aggs: Vec<&Aggregate> = (0..cfg.noise_levels.len())
                .filter_map(|v| report.aggregate(d, v, m))
                .collect();
            let cost: Option<Vec<f64>> = aggs.iter().map(|a| a.test_cost).collect();
            let auc: Option<Vec<f64>> = aggs.iter().map(|a| a.mauc).collect();
            let acc: Option<Vec<f64>> = aggs.iter().map(|a| a.accuracy).collect();
            let corr = |x: &Option<Vec<f64>>| match (x, &cost) {
                (Some(x), Some(c)) => spearman(x, c).ok(),
                _ => None,
            };
            rows.push(CorrelationRow {
                dataset: d,
                method: m,
                mauc_vs_cost: corr(&auc),
                accuracy_vs_cost: corr(&acc),
            });
        }
    }
    rows
}

fn correlation_table(report: &ExperimentReport) -> Option<ResultsTable> {
    if report.correlations.is_empty() || report.datasets.len() < 2 {
        return None;
    }
    let cfg = &report.config;
    let mut methods: Vec<String> = cfg.methods.iter().map(|m| format!("mauc-{m}")).collect();
    methods.extend(cfg.methods.iter().map(|m| format!("acc-{m}")));
    let values = (0..report.datasets.len())
        .map(|d| {
            let rows: Vec<&CorrelationRow> = report.correlations.iter().filter(|r| r.dataset == d).collect();
            let mut v: Vec<Option<f64>> = rows.iter().map(|r| r.mauc_vs_cost).collect();
            v.extend(rows.iter().map(|r| r.accuracy_vs_cost));
            v.into_iter().collect::<Option<Vec<f64>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    Some(ResultsTable {
        methods,
        datasets: report.datasets.iter().map(|d| d.name.clone()).collect(),
        values,
    })
}

impl ExperimentReport {
    pub fn aggregate(&self, dataset: usize, variant: usize, method: Method) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.dataset == dataset && a.variant == variant && a.method == method)
    }

    /// Datasets x methods grid of mean test cost per instance for one
    /// variant; `None` if any entry is missing.
    pub fn cost_table(&self, variant: usize) -> Option<ResultsTable> {
        let values = (0..self.datasets.len())
            .map(|d| {
                self.config
                    .methods
                    .iter()
                    .map(|&m| self.aggregate(d, variant, m).and_then(|a| a.test_cost))
                    .collect::<Option<Vec<f64>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        Some(ResultsTable {
            methods: self.config.methods.iter().map(|m| m.to_string()).collect(),
            datasets: self.datasets.iter().map(|d| d.name.clone()).collect(),
            values,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One line per cell.
    pub fn cells_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
        let mut s = String::from(
            "dataset,variant,noise,run,fold,method,train_cost,test_cost,test_cost_total,method_accuracy,mauc,accuracy,error\n",
        );
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{:?},{},{},{},{},{},{},{},{},{},{}",
                self.datasets[c.dataset].name,
                c.variant,
                self.config.noise_levels[c.variant],
                c.run,
                c.fold,
                c.method,
                opt(c.train_cost),
                opt(c.test_cost),
                opt(c.test_cost_total),
                opt(c.method_accuracy),
                opt(c.mauc),
                opt(c.accuracy),
                c.error.as_deref().map_or(String::new(), |e| format!("\"{}\"", e.replace('"', "'"))),
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let cfg = &self.config;
        let name_w = self.datasets.iter().map(|d| d.name.len()).max().unwrap_or(7).max(7);
        let fmt = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |x| format!("{x:.p$}"));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} run(s) of {}-fold cross-validation, cost scale {}, seed {}",
            cfg.runs, cfg.folds, cfg.cost_scale, cfg.seed
        );
        for (v, level) in cfg.noise_levels.iter().enumerate() {
            let _ = writeln!(s, "\n== Variant {v} (noise {level}) ==\n");
            let _ = writeln!(s, "{:<name_w$}  {:>8}  {:>8}", "Dataset", "MAUC", "Accuracy");
            for (d, ds) in self.datasets.iter().enumerate() {
                let a = cfg.methods.first().and_then(|&m| self.aggregate(d, v, m));
                let _ = writeln!(
                    s,
                    "{:<name_w$}  {:>8}  {:>8}",
                    ds.name,
                    fmt(a.and_then(|a| a.mauc), 4),
                    fmt(a.and_then(|a| a.accuracy), 4)
                );
            }
            let _ = writeln!(s, "\nTesting cost per instance");
            let _ = write!(s, "{:<name_w$}", "Dataset");
            for m in &cfg.methods {
                let _ = write!(s, "  {:>10}", m.to_string());
            }
            s.push('\n');
            for (d, ds) in self.datasets.iter().enumerate() {
                let _ = write!(s, "{:<name_w$}", ds.name);
                for &m in &cfg.methods {
                    let _ = write!(s, "  {:>10}", fmt(self.aggregate(d, v, m).and_then(|a| a.test_cost), 2));
                }
                s.push('\n');
            }
            let rows: Vec<&ReductionRow> = self.reductions.iter().filter(|r| r.variant == v).collect();
            if !rows.is_empty() {
                let _ = writeln!(s, "\nRelative testing cost reduction vs raw (win-draw-loss)");
                for r in rows {
                    let text = match (&r.summary, &r.note) {
                        (Some(sum), _) => sum.to_string(),
                        (None, Some(n)) => format!("n/a ({n})"),
                        (None, None) => "n/a".into(),
                    };
                    let _ = writeln!(s, "{:<10}  {text}", r.method.to_string());
                }
            }
        }
        if !self.correlations.is_empty() {
            let _ = writeln!(s, "\n== Spearman correlation with testing cost across variants ==\n");
            let _ = write!(s, "{:<name_w$}", "Dataset");
            for m in &cfg.methods {
                let _ = write!(s, "  {:>15}  {:>15}", format!("mauc-{m}"), format!("acc-{m}"));
            }
            s.push('\n');
            for (d, ds) in self.datasets.iter().enumerate() {
                let _ = write!(s, "{:<name_w$}", ds.name);
                for r in self.correlations.iter().filter(|r| r.dataset == d) {
                    let _ = write!(s, "  {:>15}  {:>15}", fmt(r.mauc_vs_cost, 4), fmt(r.accuracy_vs_cost, 4));
                }
                s.push('\n');
            }
        }
        if let Some(c) = &self.cost_ranking {
            let _ = writeln!(s, "\n== Method ranking by testing cost (variant 0) ==\n");
            s.push_str(&c.to_text());
        }
        if let Some(c) = &self.correlation_ranking {
            let _ = writeln!(s, "\n== Ranking of correlations (lower is better) ==\n");
            s.push_str(&c.to_text());
        }
        let errors: usize = self.aggregates.iter().map(|a| a.errors).sum();
        if errors > 0 {
            let _ = writeln!(s, "\n{errors} cell(s) failed; see the cell records for diagnostics.");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" | "txt" => Ok(ReportFormat::Text),
            other => Err(Error::invalid(format!("unknown report format '{other}'"))),
        }
    }
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes the report into `dir`: `report.json`, `costs.csv` plus
/// `cells.csv`, or `report.txt`. Returns the paths written.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match format {
        ReportFormat::Json => Ok(vec![write_file(dir.join("report.json"), &report.to_json()?)?]),
        ReportFormat::Csv => {
            let mut out = Vec::new();
            if let Some(t) = report.cost_table(0) {
                out.push(write_file(dir.join("costs.csv"), &t.to_csv_string())?);
            }
            out.push(write_file(dir.join("cells.csv"), &report.cells_csv())?);
            Ok(out)
        }
        ReportFormat::Text => Ok(vec![write_file(dir.join("report.txt"), &report.to_text())?]),
    }
}
