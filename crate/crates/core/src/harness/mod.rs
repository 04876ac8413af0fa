//! Experiment runner: data loading, configuration, trajectories and output.

mod check;
mod config;
mod mnist;
mod output;
mod rosenbrock;
mod runner;

pub use check::{run_checks, CheckResult};
pub use config::{ExperimentConfig, MethodSpec, ModelSpec, RosenbrockConfig};
pub use mnist::{
    data_dir, decode_pair, load_mnist_idx, parse_images, parse_labels, DATA_ENV, IMAGE_MAGIC, LABEL_MAGIC,
    SUBSET_TRAIN, SUBSET_VAL,
};
pub use output::{emit_outputs, fmt_float, mean_std, median_csv, records_csv, summary_json, CSV_HEADER};
pub use rosenbrock::{
    median, median_curve, run_rosenbrock_suite, run_trace, single_step_rows, single_step_study, starting_points,
    traces_to_runs, SingleStepStudy, Trace, SINGLE_STEP_POINT,
};
pub use runner::{evaluate, run_experiment, run_trajectory, MethodRun, RunRecord, TrainSetup, Trajectory};
