//! Experiment protocol: sensitivity curves and Spearman summaries, the
//! sample-efficiency search, runtime benchmarks and result files.

pub mod bench;
pub mod config;
pub mod emit;
pub mod metrics;
pub mod sample_efficiency;
pub mod sensitivity;

pub use bench::{run_bench, BenchConfig, BenchRow};
pub use config::{Dataset, DatasetSource, DatasetSpec, ExperimentConfig};
pub use emit::emit_results;
pub use metrics::{evaluate, MetricId, MetricSettings};
pub use sample_efficiency::{run_sample_efficiency, EfficiencyResult, SampleEfficiencyConfig};
pub use sensitivity::{run_sensitivity, ResultRow, ResultTable};
