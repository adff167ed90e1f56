// SPDX-License-Identifier: MIT OR Apache-2.0

use std::time::Instant;

use rayon::prelude::*;

use super::metrics::{metric_hausdorff, metric_mse};
use super::scenario::{generate_replicate, Scenario};
use crate::detect::{detect, DetectConfig, Method};
use crate::stopping::{NoiseScale, StoppingConfig};
use crate::{pairwise_mean, PrutfError, Result};

/// Environment variable capping the worker threads of [`run_experiment`].
pub const THREADS_ENV: &str = "PRUTF_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub replicates: usize,
    /// Noise levels to sweep; each replaces the scenario's own `sigma`.
    pub sigma_grid: Vec<f64>,
    pub alpha: f64,
    /// Estimate `σ` by MAD instead of handing the true value to the detector.
    pub estimate_sigma: bool,
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
    /// Worker threads; `None` reads `PRUTF_THREADS`, then uses all cores.
    pub threads: Option<usize>,
    /// Record wall time per replicate. Off means every runtime is 0.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: Method::Mprutf,
            replicates: 100,
            sigma_grid: vec![1.0],
            alpha: 0.05,
            estimate_sigma: false,
            seed: None,
            threads: None,
            timing: true,
        }
    }
}

/// Outcome of one detection run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub sigma: f64,
    pub replicate: usize,
    pub detected_count: usize,
    pub mse: f64,
    pub hausdorff: f64,
    pub runtime_seconds: f64,
    pub change_points: Vec<usize>,
}

/// Replicate means for one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub sigma: f64,
    pub mean_ncpts: f64,
    pub mean_mse: f64,
    pub mean_hausdorff: f64,
    pub mean_runtime_s: f64,
    /// Standard error of `mean_ncpts`.
    pub se_ncpts: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub scenario: String,
    pub rows: Vec<AggregateRow>,
    pub runs: Vec<RunMetrics>,
}

fn thread_count(requested: Option<usize>) -> Result<usize> {
    if let Some(t) = requested {
        return Ok(t.max(1));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|t| t.max(1))
            .map_err(|_| PrutfError::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(rayon::current_num_threads()),
    }
}

/// One replicate: simulate, detect, score.
pub fn run_replicate(scn: &Scenario, cfg: &ExperimentConfig, sigma: f64, k: usize) -> Result<RunMetrics> {
    let scn = Scenario {
        noise: scn.noise.with_sigma(sigma),
        seed: cfg.seed.unwrap_or(scn.seed),
        ..scn.clone()
    };
    let (y, f) = generate_replicate(&scn, k as u64)?;
    let noise_scale = if cfg.estimate_sigma || sigma == 0.0 {
        NoiseScale::Mad
    } else {
        NoiseScale::Known(sigma)
    };
    let detect_cfg = DetectConfig {
        stopping: StoppingConfig {
            alpha: cfg.alpha,
            sigma: noise_scale,
            ..StoppingConfig::default()
        },
        method: cfg.method,
        max_events: None,
    };
    let start = Instant::now();
    let res = detect(&y, scn.r, &detect_cfg)?;
    let runtime_seconds = if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 };
    Ok(RunMetrics {
        sigma,
        replicate: k,
        detected_count: res.change_points.len(),
        mse: metric_mse(&res.fitted, &f)?,
        hausdorff: metric_hausdorff(&res.change_points, &scn.change_points, scn.n),
        runtime_seconds,
        change_points: res.change_points,
    })
}

fn aggregate(sigma: f64, runs: &[RunMetrics]) -> AggregateRow {
    let col = |f: fn(&RunMetrics) -> f64| runs.iter().map(f).collect::<Vec<f64>>();
    let counts = col(|r| r.detected_count as f64);
    let mean_ncpts = pairwise_mean(&counts).unwrap_or(f64::NAN);
    let se_ncpts = if counts.len() > 1 {
        let dev: Vec<f64> = counts.iter().map(|c| (c - mean_ncpts).powi(2)).collect();
        (crate::pairwise_sum(&dev) / (counts.len() - 1) as f64 / counts.len() as f64).sqrt()
    } else {
        0.0
    };
    AggregateRow {
        sigma,
        mean_ncpts,
        mean_mse: pairwise_mean(&col(|r| r.mse)).unwrap_or(f64::NAN),
        mean_hausdorff: pairwise_mean(&col(|r| r.hausdorff)).unwrap_or(f64::NAN),
        mean_runtime_s: pairwise_mean(&col(|r| r.runtime_seconds)).unwrap_or(f64::NAN),
        se_ncpts,
    }
}

/// Replicated simulation over a noise grid. Results do not depend on the
/// number of threads: replicate `k` always uses seed `seed ^ k` and means
/// are taken in replicate order.
pub fn run_experiment(scn: &Scenario, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    scn.validate()?;
    if cfg.replicates == 0 {
        return Err(PrutfError::InvalidConfig("at least one replicate is required".into()));
    }
    if cfg.sigma_grid.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(PrutfError::InvalidConfig("noise levels must be nonnegative".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(cfg.threads)?)
        .build()
        .map_err(|e| PrutfError::InvalidConfig(e.to_string()))?;
    let mut rows = Vec::with_capacity(cfg.sigma_grid.len());
    let mut runs = Vec::with_capacity(cfg.sigma_grid.len() * cfg.replicates);
    for &sigma in &cfg.sigma_grid {
        let batch: Vec<RunMetrics> = pool.install(|| {
            (0..cfg.replicates)
                .into_par_iter()
                .map(|k| run_replicate(scn, cfg, sigma, k))
                .collect::<Result<_>>()
        })?;
        rows.push(aggregate(sigma, &batch));
        runs.extend(batch);
    }
    Ok(ExperimentReport {
        scenario: scn.name.clone(),
        rows,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario::scenario_staircase_demo;

    #[test]
    fn thread_count_does_not_change_results() {
        let scn = scenario_staircase_demo();
        let base = ExperimentConfig {
            replicates: 12,
            sigma_grid: vec![0.3, 0.6],
            timing: false,
            ..ExperimentConfig::default()
        };
        let one = run_experiment(&scn, &ExperimentConfig { threads: Some(1), ..base.clone() }).unwrap();
        let four = run_experiment(&scn, &ExperimentConfig { threads: Some(4), ..base }).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.rows.len(), 2);
    }

    #[test]
    fn zero_replicates_rejected() {
        let cfg = ExperimentConfig {
            replicates: 0,
            ..ExperimentConfig::default()
        };
        assert!(run_experiment(&scenario_staircase_demo(), &cfg).is_err());
    }
}
