// SPDX-License-Identifier: MIT OR Apache-2.0

//! Simulated signals, noise, scoring and replicated experiments.

mod experiment;
mod metrics;
mod rng;
mod scenario;

pub use experiment::{
    run_experiment, run_replicate, AggregateRow, ExperimentConfig, ExperimentReport, RunMetrics, THREADS_ENV,
};
pub use metrics::{metric_hausdorff, metric_mse};
pub use rng::{replicate_rng, standard_normals};
pub use scenario::{
    generate, generate_replicate, scenario_pwc, scenario_pwl, scenario_staircase_demo, scenario_teeth,
    scenario_wave, Noise, Scenario, SCENARIO_FORMAT_VERSION, SCENARIO_NAMES,
};
