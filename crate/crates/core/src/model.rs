//! Fixed-utilization tasks, their jobs, and task systems padded to full
//! utilization.

use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::{lcm_capped, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskId(pub u32);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("task {0}: utilization {1} is outside (0, 1]")]
    Utilization(TaskId, Rational),
    #[error("task {0}: period must be positive, got {1}")]
    Period(TaskId, Rational),
    #[error("task {0}: start time must be non-negative, got {1}")]
    Start(TaskId, Rational),
    #[error("task {task}: no job at {t}, the task starts at {start}")]
    BeforeStart { task: TaskId, t: Rational, start: Rational },
    #[error("total utilization {total} exceeds {processors} processors")]
    Overloaded { total: Rational, processors: u32 },
    #[error("a task system needs at least one processor")]
    NoProcessors,
    #[error("duplicate task id {0}")]
    DuplicateId(TaskId),
}

/// A task whose jobs each need exactly `utilization * (deadline - release)`
/// units of processor time. The deadline set is `{start + j * period : j >= 1}`
/// and a job is released at `start` and at every deadline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedUtilizationTask {
    pub id: TaskId,
    pub start: Rational,
    pub period: Rational,
    pub utilization: Rational,
    /// Padding task; its processor time is idle time.
    #[serde(default)]
    pub dummy: bool,
}

impl FixedUtilizationTask {
    pub fn new(id: TaskId, start: Rational, period: Rational, utilization: Rational) -> Result<Self, ModelError> {
        if !utilization.is_positive() || utilization > Rational::one() {
            return Err(ModelError::Utilization(id, utilization));
        }
        if !period.is_positive() {
            return Err(ModelError::Period(id, period));
        }
        if start.is_negative() {
            return Err(ModelError::Start(id, start));
        }
        Ok(FixedUtilizationTask { id, start, period, utilization, dummy: false })
    }

    /// Periodic task released at time zero with `wcet` out of every `period`.
    pub fn periodic(id: u32, period: i64, wcet: i64) -> Result<Self, ModelError> {
        let id = TaskId(id);
        if period <= 0 {
            return Err(ModelError::Period(id, Rational::integer(period)));
        }
        Self::new(id, Rational::zero(), Rational::integer(period), Rational::new(wcet, period))
    }

    pub fn as_dummy(mut self) -> Self {
        self.dummy = true;
        self
    }

    /// Index `j >= 0` of the job whose window `[r, d)` contains `t`.
    fn job_index_at(&self, t: &Rational) -> u64 {
        ((t - &self.start) / &self.period).floor().to_u64().expect("job index overflow")
    }

    pub fn release_of(&self, index: u64) -> Rational {
        &self.start + &self.period * Rational::from(index as i64)
    }

    /// Earliest deadline strictly after `t`.
    pub fn next_deadline(&self, t: &Rational) -> Rational {
        if *t < self.start {
            return &self.start + &self.period;
        }
        self.release_of(self.job_index_at(t) + 1)
    }

    /// The job active in the window containing `t`.
    pub fn job_at(&self, t: &Rational) -> Result<Job, ModelError> {
        if *t < self.start {
            return Err(ModelError::BeforeStart { task: self.id, t: t.clone(), start: self.start.clone() });
        }
        Ok(self.job(self.job_index_at(t)))
    }

    /// The `index`-th job (zero-based).
    pub fn job(&self, index: u64) -> Job {
        let release = self.release_of(index);
        let deadline = &release + &self.period;
        let requirement = &self.utilization * &self.period;
        Job { task: self.id, index, release, deadline, remaining: requirement.clone(), requirement }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub task: TaskId,
    pub index: u64,
    pub release: Rational,
    pub deadline: Rational,
    pub requirement: Rational,
    /// Execution still owed, `e(J, t)`.
    pub remaining: Rational,
}

impl Job {
    pub fn is_complete(&self) -> bool {
        self.remaining.is_zero()
    }
}

/// Where padding tasks get their period from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddingConfig {
    /// Upper bound on the dummy period; the hyperperiod is used when smaller.
    pub max_period: u64,
}

impl Default for PaddingConfig {
    fn default() -> Self {
        PaddingConfig { max_period: 5000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSystem {
    pub tasks: Vec<FixedUtilizationTask>,
    pub processors: u32,
}

impl TaskSystem {
    pub fn total_utilization(&self) -> Rational {
        self.tasks.iter().map(|t| &t.utilization).sum()
    }

    pub fn is_fully_utilized(&self) -> bool {
        self.total_utilization() == Rational::from(self.processors)
    }

    pub fn task(&self, id: TaskId) -> Option<&FixedUtilizationTask> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn real_tasks(&self) -> impl Iterator<Item = &FixedUtilizationTask> {
        self.tasks.iter().filter(|t| !t.dummy)
    }

    /// Least common multiple of all periods when they are integers and the
    /// result stays below `cap`.
    pub fn hyperperiod(&self, cap: u64) -> Option<u64> {
        let periods: Option<Vec<u64>> =
            self.tasks.iter().map(|t| t.period.to_i64().and_then(|p| u64::try_from(p).ok())).collect();
        lcm_capped(periods?, cap)
    }
}

/// Append dummy tasks so the total utilization equals `processors` exactly.
///
/// The residual is split into `ceil(residual)` dummies: unit ones and a
/// final fractional one. Their period is the hyperperiod of the input,
/// bounded by `config.max_period`.
pub fn pad_to_full_utilization(
    tasks: Vec<FixedUtilizationTask>,
    processors: u32,
    config: &PaddingConfig,
) -> Result<TaskSystem, ModelError> {
    if processors == 0 {
        return Err(ModelError::NoProcessors);
    }
    let mut seen = std::collections::HashSet::new();
    for t in &tasks {
        if !seen.insert(t.id) {
            return Err(ModelError::DuplicateId(t.id));
        }
        if !t.utilization.is_positive() || t.utilization > Rational::one() {
            return Err(ModelError::Utilization(t.id, t.utilization.clone()));
        }
    }
    let mut system = TaskSystem { tasks, processors };
    let total = system.total_utilization();
    let m = Rational::from(processors);
    if total > m {
        return Err(ModelError::Overloaded { total, processors });
    }
    let mut residual = &m - &total;
    if residual.is_zero() {
        return Ok(system);
    }
    let period = system.hyperperiod(config.max_period).unwrap_or(config.max_period).max(1);
    let period = Rational::integer(period as i64);
    let mut next_id = system.tasks.iter().map(|t| t.id.0 + 1).max().unwrap_or(1);
    while residual.is_positive() {
        let u = if residual > Rational::one() { Rational::one() } else { residual.clone() };
        residual -= &u;
        let dummy = FixedUtilizationTask::new(TaskId(next_id), Rational::zero(), period.clone(), u)?.as_dummy();
        system.tasks.push(dummy);
        next_id += 1;
    }
    Ok(system)
}
