//! Batch experiments over generated task sets.
//!
//! Each set is generated from its own seed, reduced, simulated and checked
//! independently, so sets can run on any number of worker threads; results
//! always come back in `(n, set)` order.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{generate_taskset, set_seed, GeneratorError, PeriodRange};
use crate::model::PaddingConfig;
use crate::reduction::{build_forest, PackingHeuristic, ReductionError};
use crate::scheduler::{default_horizon, ScheduleError, Scheduler};
use crate::validation::{check_trace, count_preemptions};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub processors: u32,
    pub n_values: Vec<usize>,
    pub sets_per_n: usize,
    pub periods: PeriodRange,
    pub seed: u64,
    pub horizon_cap: u64,
    pub heuristic: PackingHeuristic,
    /// Run the full trace checker on every simulated set.
    pub check_traces: bool,
}

/// 17, then 18 to 64 in steps of two.
pub fn default_n_values() -> Vec<usize> {
    std::iter::once(17).chain((18..=64).step_by(2)).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            processors: 16,
            n_values: default_n_values(),
            sets_per_n: 100,
            periods: PeriodRange::default(),
            seed: 1,
            horizon_cap: 5000,
            heuristic: PackingHeuristic::WorstFitDecreasing,
            check_traces: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("n = {n}, set {set}: {source}")]
    Generator { n: usize, set: usize, source: GeneratorError },
    #[error("n = {n}, set {set}: {source}")]
    Reduction { n: usize, set: usize, source: ReductionError },
    #[error("n = {n}, set {set}: {source}")]
    Schedule { n: usize, set: usize, source: ScheduleError },
    #[error("n = {n}, set {set}: trace rejected: {detail}")]
    Invalid { n: usize, set: usize, detail: String },
    #[error("n = {n}, set {set}: {misses} deadline misses")]
    Misses { n: usize, set: usize, misses: u64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub n: usize,
    pub set: usize,
    pub levels: u32,
    pub jobs: u64,
    pub preemptions: u64,
    pub avg_preempt: f64,
    pub migrations: u64,
    pub misses: u64,
}

fn generate(config: &ExperimentConfig, n: usize, set: usize) -> Result<crate::model::TaskSystem, ExperimentError> {
    let padding = PaddingConfig { max_period: config.horizon_cap };
    generate_taskset(n, config.processors, config.periods, set_seed(config.seed, n, set), &padding)
        .map_err(|source| ExperimentError::Generator { n, set, source })
}

/// Reduction levels of one generated set.
pub fn levels_of_set(config: &ExperimentConfig, n: usize, set: usize) -> Result<u32, ExperimentError> {
    let system = generate(config, n, set)?;
    let forest =
        build_forest(&system, config.heuristic).map_err(|source| ExperimentError::Reduction { n, set, source })?;
    Ok(forest.levels())
}

/// Generate, reduce and simulate one set.
pub fn simulate_set(config: &ExperimentConfig, n: usize, set: usize) -> Result<MetricsRow, ExperimentError> {
    let system = generate(config, n, set)?;
    let forest =
        build_forest(&system, config.heuristic).map_err(|source| ExperimentError::Reduction { n, set, source })?;
    let horizon = default_horizon(&system, config.horizon_cap);
    let run = Scheduler::with_horizon(&system, &forest, &horizon)
        .and_then(|s| s.run(&horizon))
        .map_err(|source| ExperimentError::Schedule { n, set, source })?;
    if config.check_traces {
        let report = check_trace(&system, &run.trace);
        if !report.valid {
            let detail = report.violations.first().map(|v| v.to_string()).unwrap_or_default();
            return Err(ExperimentError::Invalid { n, set, detail });
        }
    }
    let stats = count_preemptions(&system, &run.trace);
    Ok(MetricsRow {
        n,
        set,
        levels: forest.levels(),
        jobs: stats.jobs_completed,
        preemptions: stats.preemption_points,
        avg_preempt: stats.average.to_f64(),
        migrations: stats.migrations,
        misses: run.misses.len() as u64,
    })
}

fn jobs(config: &ExperimentConfig) -> Vec<(usize, usize)> {
    config.n_values.iter().flat_map(|&n| (0..config.sets_per_n).map(move |s| (n, s))).collect()
}

/// Apply `f` to every `(n, set)` of the batch, one thread.
pub fn map_sequential<T, F>(config: &ExperimentConfig, f: F) -> Result<Vec<T>, ExperimentError>
where
    F: Fn(&ExperimentConfig, usize, usize) -> Result<T, ExperimentError>,
{
    jobs(config).into_iter().map(|(n, s)| f(config, n, s)).collect()
}

/// Apply `f` to every `(n, set)` of the batch on the rayon pool.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, F>(config: &ExperimentConfig, f: F) -> Result<Vec<T>, ExperimentError>
where
    T: Send,
    F: Fn(&ExperimentConfig, usize, usize) -> Result<T, ExperimentError> + Sync,
{
    use rayon::prelude::*;
    jobs(config).into_par_iter().map(|(n, s)| f(config, n, s)).collect()
}

/// Parallel when the `parallel` feature is on, sequential otherwise.
pub fn map_batch<T, F>(config: &ExperimentConfig, f: F) -> Result<Vec<T>, ExperimentError>
where
    T: Send,
    F: Fn(&ExperimentConfig, usize, usize) -> Result<T, ExperimentError> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(config, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(config, f)
    }
}

/// Simulate the whole batch. Sets with misses are reported, not rejected.
pub fn run_batch(config: &ExperimentConfig) -> Result<Vec<MetricsRow>, ExperimentError> {
    map_batch(config, simulate_set)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub n: usize,
    pub sets: usize,
    pub frac_level1: f64,
    pub frac_level2: f64,
    pub max_level: u32,
}

/// `(n, set, levels)` for every set, without simulating.
pub fn run_levels_experiment(config: &ExperimentConfig) -> Result<Vec<(usize, usize, u32)>, ExperimentError> {
    map_batch(config, |c, n, s| levels_of_set(c, n, s).map(|l| (n, s, l)))
}

pub fn summarize_levels(rows: &[(usize, usize, u32)]) -> Vec<LevelSummary> {
    let mut out: Vec<LevelSummary> = Vec::new();
    for &(n, _, level) in rows {
        if out.last().is_none_or(|s| s.n != n) {
            out.push(LevelSummary { n, sets: 0, frac_level1: 0.0, frac_level2: 0.0, max_level: 0 });
        }
        let s = out.last_mut().unwrap();
        s.sets += 1;
        match level {
            1 => s.frac_level1 += 1.0,
            2 => s.frac_level2 += 1.0,
            _ => {}
        }
        s.max_level = s.max_level.max(level);
    }
    for s in &mut out {
        s.frac_level1 /= s.sets as f64;
        s.frac_level2 /= s.sets as f64;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreemptionSummary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Simulate the batch and fail on the first set with a deadline miss.
pub fn run_preemption_experiment(config: &ExperimentConfig) -> Result<Vec<MetricsRow>, ExperimentError> {
    let rows = run_batch(config)?;
    if let Some(r) = rows.iter().find(|r| r.misses > 0) {
        return Err(ExperimentError::Misses { n: r.n, set: r.set, misses: r.misses });
    }
    Ok(rows)
}

pub fn summarize_preemptions(rows: &[MetricsRow]) -> Vec<PreemptionSummary> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let n = rows[i].n;
        let mut v: Vec<f64> = rows[i..].iter().take_while(|r| r.n == n).map(|r| r.avg_preempt).collect();
        i += v.len();
        v.sort_by(f64::total_cmp);
        out.push(PreemptionSummary {
            n,
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        });
    }
    out
}

pub fn write_csv<W: io::Write, T: Serialize>(writer: W, rows: &[T]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
