//! Metrics, task datasets and the benchmark runner.

mod bench;
mod dataset;
mod metrics;
pub mod synth;

pub use bench::{
    aggregate, evaluation_accuracy, observation_accuracy, render_ablation_table, run_ablation, run_benchmark,
    AblationRun, BenchError, BenchOptions, EvalCase, MethodAggregate, MethodSpec, MetricsReport, ReportRow,
};
pub use dataset::{
    build_tasks, load_tasks, parse_tasks, write_tasks, Bucket, Dataset, DatasetError, DatasetManifest, Task, MANIFEST_FILE,
    SOURCES_FILE, TASKS_FILE,
};
pub use metrics::{completeness, correct_prefix, score_code, success, surplus, Accuracy, MetricError, Score};
