//! Rank statistics used to compare methods across datasets: Spearman
//! correlation, the Friedman test, Holm's step-down procedure and relative
//! cost-reduction summaries.
//!
//! Ties always receive midranks.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Which end of a score scale is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Higher,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lower" | "min" | "lower-is-better" => Ok(Direction::Lower),
            "higher" | "max" | "higher-is-better" => Ok(Direction::Higher),
            other => Err(Error::invalid(format!("unknown rank direction '{other}'"))),
        }
    }
}

/// Midranks, 1-based, smallest value first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    pub ranks: Vec<f64>,
    /// Sizes of tie groups with more than one member.
    pub ties: Vec<usize>,
}

pub fn midranks(values: &[f64]) -> RankVector {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i..j share the average of ranks i+1..=j.
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    RankVector { ranks, ties }
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho as the Pearson correlation of midranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dims(format!("{} vs {} observations", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::invalid("Spearman correlation needs at least 2 pairs"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("Spearman inputs must be finite"));
    }
    pearson(&midranks(x).ranks, &midranks(y).ranks)
        .ok_or_else(|| Error::invalid("correlation undefined for a constant vector"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub avg_ranks: Vec<f64>,
    /// Tie-corrected chi-square statistic.
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub datasets: usize,
}

/// Friedman test on a datasets x methods matrix. Rank 1 is best according
/// to `better`.
pub fn friedman_test(results: &[Vec<f64>], better: Direction) -> Result<FriedmanResult> {
    let n = results.len();
    let k = results.first().map_or(0, Vec::len);
    if n < 2 || k < 2 {
        return Err(Error::invalid(format!(
            "Friedman test needs at least 2 datasets and 2 methods, got {n}x{k}"
        )));
    }
    if let Some(i) = results.iter().position(|r| r.len() != k) {
        return Err(Error::dims(format!("dataset row {i} has {} methods, expected {k}", results[i].len())));
    }
    if results.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("Friedman inputs must be finite"));
    }
    let mut rank_sums = vec![0.0; k];
    let mut tie_term = 0.0;
    for row in results {
        let oriented: Vec<f64> = match better {
            Direction::Lower => row.clone(),
            Direction::Higher => row.iter().map(|v| -v).collect(),
        };
        let r = midranks(&oriented);
        for (s, v) in rank_sums.iter_mut().zip(&r.ranks) {
            *s += v;
        }
        tie_term += r.ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>();
    }
    let (nf, kf) = (n as f64, k as f64);
    let avg_ranks: Vec<f64> = rank_sums.iter().map(|s| s / nf).collect();
    let total: f64 = avg_ranks.iter().sum();
    let expected = kf * (kf + 1.0) / 2.0;
    if (total - expected).abs() > 1e-6 {
        return Err(Error::Numerical(format!(
            "average ranks sum to {total}, expected {expected}"
        )));
    }
    let numerator = 12.0 / (nf * kf * (kf + 1.0)) * rank_sums.iter().map(|r| r * r).sum::<f64>()
        - 3.0 * nf * (kf + 1.0);
    let denominator = 1.0 - tie_term / (nf * (kf * kf * kf - kf));
    let statistic = if denominator <= 1e-12 { 0.0 } else { (numerator / denominator).max(0.0) };
    let chi = ChiSquared::new(kf - 1.0).map_err(|e| Error::Numerical(e.to_string()))?;
    let p_value = if statistic == 0.0 { 1.0 } else { chi.sf(statistic) };
    Ok(FriedmanResult {
        avg_ranks,
        statistic,
        degrees_of_freedom: k - 1,
        p_value,
        datasets: n,
    })
}

/// A two-method comparison with its unadjusted p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub first: String,
    pub second: String,
    pub p_value: f64,
}

/// Two-sided z-test p-values for every pair of methods, using
/// `z = |R_i - R_j| / sqrt(k(k+1) / (6N))` on average ranks.
pub fn pairwise_rank_tests(result: &FriedmanResult, names: &[String]) -> Result<Vec<Comparison>> {
    let k = result.avg_ranks.len();
    if names.len() != k {
        return Err(Error::dims(format!("{} names for {k} methods", names.len())));
    }
    let se = (k as f64 * (k as f64 + 1.0) / (6.0 * result.datasets as f64)).sqrt();
    let normal = Normal::standard();
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let z = (result.avg_ranks[i] - result.avg_ranks[j]).abs() / se;
            out.push(Comparison {
                first: names[i].clone(),
                second: names[j].clone(),
                p_value: (2.0 * normal.sf(z)).min(1.0),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolmRow {
    pub comparison: Comparison,
    /// `alpha / (m - i + 1)` for the 1-based position i.
    pub threshold: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolmResult {
    pub alpha: f64,
    pub rows: Vec<HolmRow>,
}

impl HolmResult {
    pub fn significant_count(&self) -> usize {
        self.rows.iter().filter(|r| r.significant).count()
    }
}

/// Holm's step-down procedure. Stable on equal p-values.
pub fn holm_test(comparisons: &[Comparison], alpha: f64) -> Result<HolmResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if let Some(c) = comparisons.iter().find(|c| !(0.0..=1.0).contains(&c.p_value)) {
        return Err(Error::invalid(format!("p-value {} outside [0, 1]", c.p_value)));
    }
    let mut sorted = comparisons.to_vec();
    sorted.sort_by(|a, b| a.p_value.total_cmp(&b.p_value));
    let m = sorted.len();
    let mut still_rejecting = true;
    let rows = sorted
        .into_iter()
        .enumerate()
        .map(|(i, comparison)| {
            let threshold = alpha / (m - i) as f64;
            still_rejecting = still_rejecting && comparison.p_value < threshold;
            HolmRow {
                comparison,
                threshold,
                significant: still_rejecting,
            }
        })
        .collect();
    Ok(HolmResult { alpha, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionSummary {
    /// Mean of `(raw - method) / raw` over datasets, in percent.
    pub mean_reduction_pct: f64,
    pub wins: usize,
    pub draws: usize,
    pub losses: usize,
}

impl std::fmt::Display for ReductionSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:.2}% ({}-{}-{})",
            self.mean_reduction_pct, self.wins, self.draws, self.losses
        )
    }
}

pub fn reduction_summary(raw_costs: &[f64], method_costs: &[f64]) -> Result<ReductionSummary> {
    if raw_costs.len() != method_costs.len() {
        return Err(Error::dims(format!(
            "{} raw costs vs {} method costs",
            raw_costs.len(),
            method_costs.len()
        )));
    }
    if raw_costs.is_empty() {
        return Err(Error::invalid("no datasets to summarize"));
    }
    let mut sum = 0.0;
    let (mut wins, mut draws, mut losses) = (0, 0, 0);
    for (d, (&raw, &m)) in raw_costs.iter().zip(method_costs).enumerate() {
        if !(raw > 0.0) {
            return Err(Error::invalid(format!(
                "dataset {d}: raw cost {raw} is not positive; relative reduction undefined"
            )));
        }
        sum += (raw - m) / raw;
        match m.partial_cmp(&raw) {
            Some(std::cmp::Ordering::Less) => wins += 1,
            Some(std::cmp::Ordering::Equal) => draws += 1,
            _ => losses += 1,
        }
    }
    Ok(ReductionSummary {
        mean_reduction_pct: 100.0 * sum / raw_costs.len() as f64,
        wins,
        draws,
        losses,
    })
}

/// Datasets x methods grid, as read from or written to CSV with a
/// `dataset,<method>,...` header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl ResultsTable {
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(file);
        let header = reader
            .headers()
            .map_err(|e| Error::ingest(path, e.to_string()))?
            .clone();
        if header.len() < 3 {
            return Err(Error::ingest(path, "need a dataset column and at least 2 methods"));
        }
        let methods: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut datasets = Vec::new();
        let mut values = Vec::new();
        for (k, rec) in reader.records().enumerate() {
            let row = k + 1;
            let rec = rec.map_err(|e| Error::ingest(path, format!("row {row}: {e}")))?;
            if rec.len() != header.len() {
                return Err(Error::ingest(
                    path,
                    format!("row {row} has {} fields, header has {}", rec.len(), header.len()),
                ));
            }
            datasets.push(rec[0].to_string());
            let vals = rec
                .iter()
                .skip(1)
                .enumerate()
                .map(|(j, cell)| {
                    cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                        Error::ingest(path, format!("row {row}, column {}: '{cell}' is not a finite number", j + 2))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            values.push(vals);
        }
        Ok(Self {
            methods,
            datasets,
            values,
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("dataset");
        for m in &self.methods {
            s.push(',');
            s.push_str(m);
        }
        s.push('\n');
        for (d, row) in self.datasets.iter().zip(&self.values) {
            s.push_str(d);
            for v in row {
                let _ = write!(s, ",{v:?}");
            }
            s.push('\n');
        }
        s
    }
}

/// Friedman ranking plus Holm comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodComparison {
    pub methods: Vec<String>,
    pub direction: Direction,
    pub friedman: FriedmanResult,
    pub holm: HolmResult,
}

pub fn compare_methods(table: &ResultsTable, direction: Direction, alpha: f64) -> Result<MethodComparison> {
    let friedman = friedman_test(&table.values, direction)?;
    let pairs = pairwise_rank_tests(&friedman, &table.methods)?;
    let holm = holm_test(&pairs, alpha)?;
    Ok(MethodComparison {
        methods: table.methods.clone(),
        direction,
        friedman,
        holm,
    })
}

/// Small-magnitude values in scientific notation, the rest to 4 decimals.
fn fmt_p(p: f64) -> String {
    if p != 0.0 && p < 1e-3 {
        format!("{p:.4E}")
    } else {
        format!("{p:.4}")
    }
}

impl MethodComparison {
    /// Plain-text layout: average ranks, the Friedman p-value, then the
    /// Holm table sorted by p-value.
    pub fn to_text(&self) -> String {
        let width = self.methods.iter().map(String::len).max().unwrap_or(0).max(7);
        let mut s = String::new();
        let _ = writeln!(s, "Friedman Test");
        let _ = writeln!(s, "{:<width$}  Ranking", "Methods");
        for (m, r) in self.methods.iter().zip(&self.friedman.avg_ranks) {
            let _ = writeln!(s, "{m:<width$}  {r:.4}");
        }
        let _ = writeln!(
            s,
            "P-value computed by Friedman Test: {} (chi-square {:.4}, df {})",
            fmt_p(self.friedman.p_value),
            self.friedman.statistic,
            self.friedman.degrees_of_freedom
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "Holm Test (alpha = {})", self.holm.alpha);
        let pair_width = self
            .holm
            .rows
            .iter()
            .map(|r| r.comparison.first.len() + r.comparison.second.len() + 5)
            .max()
            .unwrap_or(0)
            .max(11);
        let _ = writeln!(s, "{:<pair_width$}  {:>10}  {:>7}  Significant", "Comparisons", "P-value", "a_Holm");
        for r in &self.holm.rows {
            let pair = format!("{} vs. {}", r.comparison.first, r.comparison.second);
            let _ = writeln!(
                s,
                "{pair:<pair_width$}  {:>10}  {:>7.4}  {}",
                fmt_p(r.comparison.p_value),
                r.threshold,
                if r.significant { "yes" } else { "no" }
            );
        }
        s
    }
}
