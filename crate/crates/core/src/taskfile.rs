//! Task-set files.
//!
//! A task set is a TOML document with the processor count and one
//! `[[task]]` table per periodic task:
//!
//! ```toml
//! processors = 2
//!
//! [[task]]
//! id = 1
//! period = 3
//! wcet = 2
//! ```
//!
//! All three task fields are positive integers and `wcet <= period`; the
//! utilization is `wcet / period`. Every task is released at time zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{pad_to_full_utilization, FixedUtilizationTask, ModelError, PaddingConfig, TaskSystem};

#[derive(Debug, Error)]
pub enum TaskFileError {
    #[error("task-set syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("task {id}: {field} must be positive, got {value}")]
    NonPositive { id: u32, field: &'static str, value: i64 },
    #[error("task {id}: wcet {wcet} exceeds period {period} (utilization above 1)")]
    OverUnit { id: u32, wcet: i64, period: i64 },
    #[error("processors must be positive")]
    NoProcessors,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: u32,
    pub period: i64,
    pub wcet: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSetFile {
    pub processors: u32,
    #[serde(rename = "task", default)]
    pub tasks: Vec<TaskSpec>,
}

impl TaskSetFile {
    pub fn parse(text: &str) -> Result<Self, TaskFileError> {
        let file: TaskSetFile = toml::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<(), TaskFileError> {
        if self.processors == 0 {
            return Err(TaskFileError::NoProcessors);
        }
        for t in &self.tasks {
            if t.period <= 0 {
                return Err(TaskFileError::NonPositive { id: t.id, field: "period", value: t.period });
            }
            if t.wcet <= 0 {
                return Err(TaskFileError::NonPositive { id: t.id, field: "wcet", value: t.wcet });
            }
            if t.wcet > t.period {
                return Err(TaskFileError::OverUnit { id: t.id, wcet: t.wcet, period: t.period });
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("task set serializes")
    }

    pub fn tasks(&self) -> Result<Vec<FixedUtilizationTask>, TaskFileError> {
        self.validate()?;
        self.tasks.iter().map(|t| FixedUtilizationTask::periodic(t.id, t.period, t.wcet).map_err(Into::into)).collect()
    }

    /// The padded, fully utilized system.
    pub fn to_system(&self, padding: &PaddingConfig) -> Result<TaskSystem, TaskFileError> {
        Ok(pad_to_full_utilization(self.tasks()?, self.processors, padding)?)
    }
}
