//! Metrics, paired significance testing and the cross-validation harness.

mod benchmark;
mod metrics;
mod sweep;
mod wilcoxon;

pub use benchmark::{
    benchmark_dataset, render_table, run_benchmark, BenchmarkOptions, BenchmarkReport, Comparison, DatasetFailure,
    DatasetReport, MetricSample, ModelKind, ModelSummary,
};
pub use metrics::{auroc, rmse, score};
pub use sweep::{sweep_features, sweep_to_csv, SweepOptions, SweepPoint};
pub use wilcoxon::{wilcoxon_signed_rank, Better, WilcoxonResult};

/// Sample mean and standard deviation (n − 1 denominator; 0 for n < 2).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}
