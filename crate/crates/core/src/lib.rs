//! Optimal multiprocessor real-time scheduling by reduction to uniprocessor.

// errors carry exact times, which are not small
#![allow(clippy::result_large_err)]

pub mod experiment;
pub mod generator;
pub mod model;
pub mod oracle;
pub mod reduction;
pub mod scheduler;
pub mod server;
pub mod svg;
pub mod taskfile;
pub mod ticks;
pub mod time;
pub mod trace;
pub mod validation;

pub use model::{FixedUtilizationTask, Job, ModelError, PaddingConfig, TaskId, TaskSystem};
pub use reduction::{build_forest, NodeId, NodeKind, PackingHeuristic, ReductionForest};
pub use scheduler::{run, Run, ScheduleError, Scheduler};
pub use time::Rational;
pub use trace::{Interval, ScheduleTrace};
