//! Performance metrics, paired significance testing and the experiment
//! protocols binding the pipeline together.

mod experiment;
mod metrics;
mod stats;

pub use experiment::{
    grid_search, median, run_benchmark_experiment, run_single_fold, ExperimentOutcome, Method,
    MetricName, MetricRecord, ProtocolConfig, RunDiagnostics,
};
pub use metrics::{auprc, auroc};
pub use stats::{wilcoxon_signed_rank, WilcoxonResult};
