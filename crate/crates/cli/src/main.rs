//! Command-line front end: dataset generation, bias induction, single-fold
//! runs, the full CV experiment, grid search and result reporting.
//!
//! Exit codes: 0 success, 1 user error (bad flags, config or data),
//! 2 internal invariant violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use metric_dst::eval::{
    self, median, run_benchmark_experiment, run_single_fold, Method, MetricName,
};
use metric_dst::io::{self, DatasetSource, ExperimentConfig, ResultsRow};
use metric_dst::Error;

#[derive(Parser)]
#[command(name = "metric-dst", version, about = "Diversity-guided self-training benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config JSON
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV from the config's dataset section
    Gen {
        #[command(flatten)]
        common: Common,
        /// Output dataset CSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply the config's bias section to a dataset and write selected indices
    Bias {
        #[command(flatten)]
        common: Common,
        /// Input dataset CSV (defaults to the config's dataset section)
        #[arg(long)]
        data: Option<PathBuf>,
        /// Output one-column index CSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the requested methods on a single CV fold and print the metrics
    Run {
        #[command(flatten)]
        common: Common,
        /// Method name (repeatable); default: all five
        #[arg(long = "method")]
        methods: Vec<String>,
        /// Fold index within the config's CV deal
        #[arg(long, default_value_t = 0)]
        fold: usize,
    },
    /// Run the full cross-validated experiment and write results/diagnostics
    Experiment {
        #[command(flatten)]
        common: Common,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Method name (repeatable); default: all five
        #[arg(long = "method")]
        methods: Vec<String>,
        /// Concurrent folds; 1 keeps execution fully sequential
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Exhaustive (mu, p) search minimizing 1 - median AUROC of metric_dst
    Grid {
        #[command(flatten)]
        common: Common,
        /// Confidence thresholds to try
        #[arg(long, value_delimiter = ',', default_values_t = [0.80, 0.85, 0.90, 0.95])]
        mu: Vec<f64>,
        /// Per-iteration selection sizes to try
        #[arg(long, value_delimiter = ',', default_values_t = [10, 20, 50])]
        p: Vec<usize>,
        /// Concurrent folds per grid cell
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Per-method medians and paired Wilcoxon tests from a results CSV
    Report {
        /// Results CSV produced by `experiment`
        results: PathBuf,
        /// Metric to summarize
        #[arg(long, default_value = "auroc")]
        metric: String,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut config = ExperimentConfig::from_file(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn parse_methods(names: &[String]) -> Result<Vec<Method>, Error> {
    if names.is_empty() {
        return Ok(Method::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| {
            Method::parse(n)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{n}'")))
        })
        .collect()
}

fn records_to_rows(
    records: &[eval::MetricRecord],
    experiment: &str,
    dataset: &str,
    seed: u64,
) -> Vec<ResultsRow> {
    records
        .iter()
        .map(|r| ResultsRow {
            experiment: experiment.to_string(),
            dataset: dataset.to_string(),
            method: r.method.name().to_string(),
            fold: r.fold,
            metric: r.metric.name().to_string(),
            value: r.value,
            seed,
        })
        .collect()
}

fn print_summary(rows: &[ResultsRow], metric: &str) {
    let summary = io::summarize(rows, metric);
    println!("metric: {metric}");
    println!("method,median");
    for (method, m) in &summary.medians {
        println!("{method},{m}");
    }
    if !summary.wilcoxon_vs_supervised_bias.is_empty() {
        println!("method,p_vs_supervised_bias");
        for (method, p) in &summary.wilcoxon_vs_supervised_bias {
            println!("{method},{p}");
        }
    }
}

fn run_experiment_to_dir(
    config: &ExperimentConfig,
    methods: &[Method],
    jobs: usize,
    out: &Path,
) -> Result<(), Error> {
    let dataset = config.dataset.load(config.seed().fork(0xDA7A))?;
    let protocol = config.protocol(jobs);
    eprintln!(
        "experiment '{}': {} samples, {} folds, methods [{}]",
        config.name,
        dataset.n_samples(),
        protocol.n_folds,
        methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ")
    );
    let outcome = run_benchmark_experiment(
        &dataset,
        &config.bias,
        &protocol,
        methods,
        &config.eval.metrics,
        config.seed(),
    )?;
    std::fs::create_dir_all(out)?;
    let dataset_name = config.dataset_name();
    io::write_results(
        &outcome.records,
        &config.name,
        &dataset_name,
        config,
        out.join("results.csv"),
    )?;
    io::write_diagnostics(&outcome.diagnostics, out.join("diagnostics.jsonl"))?;
    let rows = records_to_rows(&outcome.records, &config.name, &dataset_name, config.seed);
    for &metric in &config.eval.metrics {
        let summary = io::summarize(&rows, metric.name());
        io::write_summary(&summary, out.join(format!("summary_{}.json", metric.name())))?;
    }
    eprintln!("wrote {}", out.join("results.csv").display());
    Ok(())
}

fn real_main(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Gen { common, out } => {
            let config = load_config(&common)?;
            let dataset = config.dataset.load(config.seed().fork(0xDA7A))?;
            io::write_dataset(&dataset, &out)?;
            eprintln!(
                "wrote {} ({} samples, {} features)",
                out.display(),
                dataset.n_samples(),
                dataset.n_features()
            );
        }
        Command::Bias { common, data, out } => {
            let config = load_config(&common)?;
            let dataset = match data {
                Some(path) => DatasetSource::Path {
                    path: path.display().to_string(),
                }
                .load(config.seed())?,
                None => config.dataset.load(config.seed().fork(0xDA7A))?,
            };
            let candidates: Vec<usize> = (0..dataset.n_samples()).collect();
            let mut selected = config
                .bias
                .apply(&dataset, &candidates, config.seed().fork(0xB1A5))?;
            selected.sort_unstable();
            io::write_indices(&selected, &out)?;
            eprintln!("wrote {} ({} indices)", out.display(), selected.len());
        }
        Command::Run {
            common,
            methods,
            fold,
        } => {
            let config = load_config(&common)?;
            let methods = parse_methods(&methods)?;
            let dataset = config.dataset.load(config.seed().fork(0xDA7A))?;
            eprintln!("fold {fold} of {}", config.eval.n_folds);
            let outcome = run_single_fold(
                &dataset,
                &config.bias,
                &config.protocol(1),
                &methods,
                &config.eval.metrics,
                fold,
                config.seed(),
            )?;
            println!("method,fold,metric,value");
            for r in &outcome.records {
                println!("{},{},{},{}", r.method.name(), r.fold, r.metric.name(), r.value);
            }
        }
        Command::Experiment {
            common,
            out,
            methods,
            jobs,
        } => {
            let config = load_config(&common)?;
            let methods = parse_methods(&methods)?;
            run_experiment_to_dir(&config, &methods, jobs, &out)?;
        }
        Command::Grid {
            common,
            mu,
            p,
            jobs,
        } => {
            let config = load_config(&common)?;
            if mu.is_empty() || p.is_empty() {
                return Err(Error::InvalidArgument("empty grid axis".into()));
            }
            let dataset = config.dataset.load(config.seed().fork(0xDA7A))?;
            let grid = vec![
                ("mu".to_string(), mu.clone()),
                ("p".to_string(), p.iter().map(|&v| v as f64).collect()),
            ];
            let (best, objective) = eval::grid_search(&grid, |assignment| {
                let mu = assignment[0].1;
                let p = assignment[1].1 as usize;
                eprintln!("grid cell mu={mu} p={p}");
                let mut protocol = config.protocol(jobs);
                protocol.selftrain.mu = mu;
                protocol.selftrain.p = p;
                protocol.auto_p = false;
                match run_benchmark_experiment(
                    &dataset,
                    &config.bias,
                    &protocol,
                    &[Method::MetricDst],
                    &[MetricName::Auroc],
                    config.seed(),
                ) {
                    Ok(outcome) => {
                        let values: Vec<f64> =
                            outcome.records.iter().map(|r| r.value).collect();
                        1.0 - median(&values)
                    }
                    Err(e) => {
                        eprintln!("grid cell failed: {e}");
                        f64::INFINITY
                    }
                }
            });
            if !objective.is_finite() {
                return Err(Error::InvalidArgument("every grid cell failed".into()));
            }
            println!(
                "{}",
                serde_json::json!({
                    "mu": best[0].1,
                    "p": best[1].1 as usize,
                    "median_auroc": 1.0 - objective,
                })
            );
        }
        Command::Report { results, metric } => {
            let rows = io::read_results(&results)?;
            if MetricName::parse(&metric).is_none() {
                return Err(Error::InvalidArgument(format!("unknown metric '{metric}'")));
            }
            print_summary(&rows, &metric);
        }
    }
    Ok(())
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
    let outcome = std::panic::catch_unwind(move || real_main(cli));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(_) => {
            eprintln!("error: internal invariant violation");
            ExitCode::from(2)
        }
    }
}
