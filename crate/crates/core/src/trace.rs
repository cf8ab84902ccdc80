//! Multi-level schedule traces and their text format.
//!
//! ```text
//! # runsched trace v1
//! processors 2
//! horizon 3/1
//! level 1 1
//! task 1 0/1 3/1 2/3 real
//! iv 0 0 4 2 0 0/1 1/1
//! iv 1 0 3 - - 0/1 1/1
//! ```
//!
//! `level L P` gives the processor count of level `L > 0`. An `iv` record
//! is `level processor node task job start end`; task and job are `-` above
//! level zero. Times are exact fractions.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{FixedUtilizationTask, TaskId};
use crate::reduction::NodeId;
use crate::time::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub level: u32,
    pub proc: u32,
    pub node: NodeId,
    pub task: Option<TaskId>,
    pub job: Option<u64>,
    pub start: Rational,
    pub end: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleTrace {
    pub processors: u32,
    pub horizon: Rational,
    pub tasks: Vec<FixedUtilizationTask>,
    /// Processors per level; index zero is the real platform.
    pub level_processors: Vec<u32>,
    pub intervals: Vec<Interval>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing `{0}` header")]
    MissingHeader(&'static str),
}

impl ScheduleTrace {
    pub fn levels(&self) -> u32 {
        self.level_processors.len() as u32
    }

    /// Order by level, start time, then processor.
    pub fn sort(&mut self) {
        self.intervals
            .sort_by(|a, b| a.level.cmp(&b.level).then_with(|| a.start.cmp(&b.start)).then(a.proc.cmp(&b.proc)));
    }

    pub fn level(&self, level: u32) -> impl Iterator<Item = &Interval> + '_ {
        self.intervals.iter().filter(move |iv| iv.level == level)
    }

    pub fn task(&self, id: TaskId) -> Option<&FixedUtilizationTask> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# runsched trace v1\n");
        writeln!(out, "processors {}", self.processors).unwrap();
        writeln!(out, "horizon {}", self.horizon.to_fraction_string()).unwrap();
        for (l, p) in self.level_processors.iter().enumerate().skip(1) {
            writeln!(out, "level {l} {p}").unwrap();
        }
        for t in &self.tasks {
            writeln!(
                out,
                "task {} {} {} {} {}",
                t.id,
                t.start.to_fraction_string(),
                t.period.to_fraction_string(),
                t.utilization.to_fraction_string(),
                if t.dummy { "dummy" } else { "real" }
            )
            .unwrap();
        }
        for iv in &self.intervals {
            let task = iv.task.map_or("-".to_string(), |t| t.to_string());
            let job = iv.job.map_or("-".to_string(), |j| j.to_string());
            writeln!(
                out,
                "iv {} {} {} {} {} {} {}",
                iv.level,
                iv.proc,
                iv.node,
                task,
                job,
                iv.start.to_fraction_string(),
                iv.end.to_fraction_string()
            )
            .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TraceParseError> {
        let mut processors = None;
        let mut horizon = None;
        let mut level_processors = vec![0u32];
        let mut tasks = Vec::new();
        let mut intervals = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| TraceParseError::Line { line, message };
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split_whitespace().collect();
            let want = |n: usize| {
                if fields.len() == n {
                    Ok(())
                } else {
                    Err(err(format!("expected {} fields, found {}", n, fields.len())))
                }
            };
            let int = |s: &str| s.parse::<u64>().map_err(|e| err(format!("`{s}`: {e}")));
            let rat = |s: &str| s.parse::<Rational>().map_err(|e| err(format!("`{s}`: {e}")));
            let opt = |s: &str| if s == "-" { Ok(None) } else { int(s).map(Some) };
            match fields[0] {
                "processors" => {
                    want(2)?;
                    processors = Some(int(fields[1])? as u32);
                }
                "horizon" => {
                    want(2)?;
                    horizon = Some(rat(fields[1])?);
                }
                "level" => {
                    want(3)?;
                    let l = int(fields[1])? as usize;
                    if l == 0 {
                        return Err(err("level 0 is given by `processors`".into()));
                    }
                    if level_processors.len() <= l {
                        level_processors.resize(l + 1, 0);
                    }
                    level_processors[l] = int(fields[2])? as u32;
                }
                "task" => {
                    want(6)?;
                    let id = TaskId(int(fields[1])? as u32);
                    let task = FixedUtilizationTask::new(id, rat(fields[2])?, rat(fields[3])?, rat(fields[4])?)
                        .map_err(|e| err(e.to_string()))?;
                    tasks.push(match fields[5] {
                        "real" => task,
                        "dummy" => task.as_dummy(),
                        other => return Err(err(format!("expected real or dummy, found `{other}`"))),
                    });
                }
                "iv" => {
                    want(8)?;
                    intervals.push(Interval {
                        level: int(fields[1])? as u32,
                        proc: int(fields[2])? as u32,
                        node: NodeId(int(fields[3])? as u32),
                        task: opt(fields[4])?.map(|t| TaskId(t as u32)),
                        job: opt(fields[5])?,
                        start: rat(fields[6])?,
                        end: rat(fields[7])?,
                    });
                }
                other => return Err(err(format!("unknown record `{other}`"))),
            }
        }
        let processors = processors.ok_or(TraceParseError::MissingHeader("processors"))?;
        level_processors[0] = processors;
        Ok(ScheduleTrace {
            processors,
            horizon: horizon.ok_or(TraceParseError::MissingHeader("horizon"))?,
            tasks,
            level_processors,
            intervals,
        })
    }
}
