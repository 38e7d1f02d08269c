use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use costsens::costgen::{generate_cost_matrix, CostGenConfig, GeneratedCostMatrix, DEFAULT_SCALE};
use costsens::data::empirical_priors;
use costsens::harness::{emit_report, run_experiment, ReportFormat};
use costsens::io::{load_cost_matrix, load_labels, load_score_matrix, read_json, write_labels};
use costsens::metrics::pairwise_auc_table;
use costsens::model::fit_method;
use costsens::stats::{compare_methods, Direction, ResultsTable};
use costsens::{ExperimentConfig, FittedModel, GaConfig, Method, PriorVector};

#[derive(Parser)]
#[command(name = "costsens", version, about = "Cost-sensitive post-processing of multi-class score matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multi-class AUC of a score matrix.
    Mauc {
        /// Headerless CSV, one row per instance, one column per class.
        #[arg(long)]
        scores: PathBuf,
        /// One class index per line.
        #[arg(long)]
        labels: PathBuf,
        /// Print the pairwise AUC table as JSON as well.
        #[arg(long)]
        json: bool,
    },
    /// Fit a conversion method on training scores and write it as JSON.
    Fit {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Cost matrix JSON: {"costs": [[...], ...]}.
        #[arg(long)]
        costs: PathBuf,
        /// raw, lf, metaclass, ga, platt or pav.
        #[arg(long)]
        method: Method,
        /// GA settings JSON; omitted fields take their defaults.
        #[arg(long)]
        ga_config: Option<PathBuf>,
        /// GA seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Label a score matrix with a fitted model.
    Decide {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        costs: PathBuf,
        /// Model JSON written by `fit`. Not needed for the raw method.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Checked against the model's method when both are given.
        #[arg(long)]
        method: Option<Method>,
        /// Output file with one predicted class per line; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a random cost matrix with Cost(i,j) ~ U[0, scale * p(i) / p(j)].
    Costgen {
        /// Comma-separated class priors; rescaled to sum to 1.
        #[arg(long, value_delimiter = ',', conflicts_with = "labels", required_unless_present = "labels")]
        priors: Option<Vec<f64>>,
        /// Estimate the priors from a label file instead.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SCALE)]
        scale: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Friedman test and Holm comparisons over a datasets x methods CSV.
    Stats {
        /// CSV with header `dataset,<method>,...`.
        #[arg(long)]
        results: PathBuf,
        /// Whether lower or higher values rank first.
        #[arg(long, default_value = "lower")]
        direction: Direction,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value = "text")]
        format: StatsFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a cross-validation experiment described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Report formats to write; repeatable.
        #[arg(long = "format", default_values = ["json", "text"])]
        formats: Vec<ReportFormat>,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum StatsFormat {
    Text,
    Json,
}

enum Failure {
    Usage(String),
    Core(costsens::Error),
}

impl From<costsens::Error> for Failure {
    fn from(e: costsens::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Core(e) if e.is_numerical() => 3,
            Failure::Core(_) => 2,
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            Failure::Core(costsens::Error::Io {
                path: p.clone(),
                source: e,
            })
        }),
        None => {
            print!("{text}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Core(e.into()))?;
    s.push('\n');
    Ok(s)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Mauc { scores, labels, json } => {
            let s = load_score_matrix(&scores)?;
            let y = load_labels(&labels)?;
            let table = pairwise_auc_table(&s, &y)?;
            if json {
                let c = table.class_count();
                let rows: Vec<Vec<f64>> = (0..c).map(|i| (0..c).map(|j| table.get(i, j)).collect()).collect();
                emit(None, &to_json(&serde_json::json!({ "mauc": table.mauc(), "pairwise_auc": rows }))?)
            } else {
                emit(None, &format!("{}\n", table.mauc()))
            }
        }
        Command::Fit {
            scores,
            labels,
            costs,
            method,
            ga_config,
            seed,
            out,
        } => {
            let s = load_score_matrix(&scores)?;
            let y = load_labels(&labels)?;
            let c = load_cost_matrix(&costs)?;
            let ga: GaConfig = match ga_config {
                Some(p) => read_json(p)?,
                None => GaConfig::default(),
            };
            let model = fit_method(method, &s, &y, &c, &ga, seed)?;
            emit(out.as_ref(), &to_json(&model)?)
        }
        Command::Decide {
            scores,
            costs,
            model,
            method,
            out,
        } => {
            let s = load_score_matrix(&scores)?;
            let c = load_cost_matrix(&costs)?;
            let model: FittedModel = match (model, method) {
                (Some(p), m) => {
                    let model: FittedModel = read_json(p)?;
                    if let Some(m) = m.filter(|&m| m != model.method()) {
                        return Err(Failure::Usage(format!(
                            "--method {m} does not match the model's method {}",
                            model.method()
                        )));
                    }
                    model
                }
                (None, Some(Method::Raw)) => FittedModel::Raw {
                    class_count: s.class_count(),
                },
                (None, _) => return Err(Failure::Usage("--model is required unless --method raw".into())),
            };
            let labels = model.decide(&s, &c)?;
            match out {
                Some(p) => write_labels(p, &labels).map_err(Failure::Core),
                None => {
                    let text: String = labels.predictions().iter().map(|p| format!("{p}\n")).collect();
                    emit(None, &text)
                }
            }
        }
        Command::Costgen {
            priors,
            labels,
            scale,
            seed,
            out,
        } => {
            let priors = match (priors, labels) {
                (Some(p), _) => {
                    let total: f64 = p.iter().sum();
                    if !(total > 0.0 && total.is_finite()) {
                        return Err(Failure::Core(costsens::Error::InvalidInput(
                            "priors must be positive".into(),
                        )));
                    }
                    PriorVector::new(p.iter().map(|v| v / total).collect())?
                }
                (None, Some(path)) => {
                    let y = load_labels(&path)?;
                    let c = y.iter().max().map_or(0, |m| m + 1);
                    empirical_priors(&y, c)?
                }
                (None, None) => return Err(Failure::Usage("give --priors or --labels".into())),
            };
            let config = CostGenConfig::new(scale, seed)?;
            let generated = GeneratedCostMatrix {
                matrix: generate_cost_matrix(&priors, &config)?,
                seed,
                scale,
                priors,
            };
            emit(out.as_ref(), &to_json(&generated)?)
        }
        Command::Stats {
            results,
            direction,
            alpha,
            format,
            out,
        } => {
            let table = ResultsTable::load_csv(&results)?;
            let cmp = compare_methods(&table, direction, alpha)?;
            let text = match format {
                StatsFormat::Text => cmp.to_text(),
                StatsFormat::Json => to_json(&cmp)?,
            };
            emit(out.as_ref(), &text)
        }
        Command::Experiment {
            config,
            out,
            formats,
            seed,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = run_experiment(&cfg)?;
            for f in formats {
                for path in emit_report(&report, f, &out)? {
                    eprintln!("wrote {}", path.display());
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Core(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
