//! Error, noise, failure-rate and pipeline studies.

pub mod failures;
pub mod noise;
pub mod pipeline;
pub mod report;
pub mod sweep;

pub use failures::{run_failure_trials, trial_keys, FailureRateReport};
pub use noise::{noise_scan, NoiseReport};
pub use pipeline::{
    calibrate_op_costs, pipeline_makespan, stage_time_estimate, throughput_curve, throughput_optimum, OpCostTable, PipelineModel,
    ThroughputRow,
};
pub use report::{csv_string, json_report, write_csv, ReportRow, SCHEMA_VERSION};
pub use sweep::{error_sweep, strictly_decreasing, ErrorRow, DEFAULT_BETAS};
