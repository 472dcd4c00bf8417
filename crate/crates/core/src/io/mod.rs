//! Model and data ingestion, run configuration, reports and the benchmark
//! harness.

mod config;
mod document;
mod instances;
mod report;
mod run;

pub use config::{EstimatorKind, OrderKind, RunConfig, DEFAULT_BNN_TAU, DEFAULT_TAU};
pub use document::{
    load_model, BnnDoc, EdgeDoc, Family, FeatureDoc, ForestDoc, LayerDoc, ModelDocument, NeuronDoc, NodeDoc,
    OutputDoc, TreeDoc, FORMAT_VERSION,
};
pub use instances::{load_instances, read_instances, LABEL_COLUMNS};
pub use report::{Aggregate, Command, EvidenceRecord, Record, Report, Status, StepRecord};
pub use run::{
    bench_table, instance_seed, run_benchmark, run_explain, BenchModel, BenchOptions, BenchRow, FfaColumns,
    Selection,
};
