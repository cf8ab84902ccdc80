//! Trace checking and preemption accounting.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::model::{TaskId, TaskSystem};
use crate::time::Rational;
use crate::trace::{Interval, ScheduleTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// Empty or reversed interval, unknown task or processor, outside the horizon.
    Malformed,
    /// Two jobs on one processor at once.
    Exclusivity,
    /// One job on two processors at once.
    Parallel,
    /// Execution outside the job window.
    Inactive,
    /// More execution than the job requires.
    Overexecution,
    /// Less execution than required by the deadline.
    DeadlineMiss,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Malformed => "malformed",
            Rule::Exclusivity => "exclusivity",
            Rule::Parallel => "parallel",
            Rule::Inactive => "inactive",
            Rule::Overexecution => "overexecution",
            Rule::DeadlineMiss => "deadline-miss",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub t: Rational,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.rule, self.t, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidityReport {
    pub valid: bool,
    pub feasible: bool,
    pub violations: Vec<Violation>,
    /// Executed time per `(task, job)`.
    pub ledger: BTreeMap<(TaskId, u64), Rational>,
}

impl ValidityReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("valid {}\nfeasible {}\njobs {}\n", self.valid, self.feasible, self.ledger.len());
        for v in &self.violations {
            out.push_str(&format!("violation {v}\n"));
        }
        out
    }
}

fn violation(rule: Rule, t: &Rational, detail: String) -> Violation {
    Violation { rule, t: t.clone(), detail }
}

/// Check the level-zero part of `trace` against `system`.
pub fn check_trace(system: &TaskSystem, trace: &ScheduleTrace) -> ValidityReport {
    let mut violations = Vec::new();
    let tasks: HashMap<TaskId, usize> = system.tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
    let mut per_proc: Vec<Vec<&Interval>> = vec![Vec::new(); system.processors as usize];
    let mut per_task: HashMap<TaskId, Vec<&Interval>> = HashMap::new();
    let mut ledger: BTreeMap<(TaskId, u64), Rational> = BTreeMap::new();

    for iv in trace.level(0) {
        let (Some(task), Some(job)) = (iv.task, iv.job) else {
            violations.push(violation(
                Rule::Malformed,
                &iv.start,
                format!("level-0 interval on node {} without a job", iv.node),
            ));
            continue;
        };
        let Some(&ti) = tasks.get(&task) else {
            violations.push(violation(Rule::Malformed, &iv.start, format!("unknown task {task}")));
            continue;
        };
        if iv.start >= iv.end || iv.start.is_negative() || iv.end > trace.horizon {
            violations.push(violation(
                Rule::Malformed,
                &iv.start,
                format!("interval [{}, {}) of task {task}", iv.start, iv.end),
            ));
            continue;
        }
        if iv.proc >= system.processors {
            violations.push(violation(Rule::Malformed, &iv.start, format!("processor {} does not exist", iv.proc)));
            continue;
        }
        let t = &system.tasks[ti];
        let release = t.release_of(job);
        let deadline = &release + &t.period;
        if iv.start < release || iv.end > deadline {
            violations.push(violation(
                Rule::Inactive,
                &iv.start,
                format!("job {job} of task {task} runs in [{}, {}) outside [{release}, {deadline})", iv.start, iv.end),
            ));
        }
        *ledger.entry((task, job)).or_insert_with(Rational::zero) += &iv.end - &iv.start;
        per_proc[iv.proc as usize].push(iv);
        per_task.entry(task).or_default().push(iv);
    }

    for (p, list) in per_proc.iter_mut().enumerate() {
        list.sort_by(|a, b| a.start.cmp(&b.start));
        for w in list.windows(2) {
            if w[1].start < w[0].end {
                violations.push(violation(
                    Rule::Exclusivity,
                    &w[1].start,
                    format!("processor {p} runs task {} and task {}", w[0].task.unwrap(), w[1].task.unwrap()),
                ));
            }
        }
    }
    for (task, list) in per_task.iter_mut() {
        list.sort_by(|a, b| a.start.cmp(&b.start));
        for w in list.windows(2) {
            if w[1].start < w[0].end {
                violations.push(violation(
                    Rule::Parallel,
                    &w[1].start,
                    format!("task {task} on processors {} and {}", w[0].proc, w[1].proc),
                ));
            }
        }
    }

    let mut feasible = true;
    for t in &system.tasks {
        let requirement = &t.utilization * &t.period;
        let mut j = 0u64;
        loop {
            let deadline = t.release_of(j + 1);
            if deadline > trace.horizon {
                break;
            }
            let done = ledger.entry((t.id, j)).or_insert_with(Rational::zero).clone();
            if done > requirement {
                violations.push(violation(
                    Rule::Overexecution,
                    &deadline,
                    format!("job {j} of task {} ran {done} of {requirement}", t.id),
                ));
            } else if done < requirement {
                feasible = false;
                violations.push(violation(
                    Rule::DeadlineMiss,
                    &deadline,
                    format!("job {j} of task {} ran {done} of {requirement}", t.id),
                ));
            }
            j += 1;
        }
    }
    for ((task, job), done) in &ledger {
        let t = &system.tasks[tasks[task]];
        if *done > &t.utilization * &t.period && t.release_of(job + 1) > trace.horizon {
            violations.push(violation(
                Rule::Overexecution,
                &trace.horizon,
                format!("job {job} of task {task} ran {done}"),
            ));
        }
    }

    let valid = violations.iter().all(|v| v.rule == Rule::DeadlineMiss);
    violations.sort_by(|a, b| a.t.cmp(&b.t).then(a.rule.cmp(&b.rule)));
    ValidityReport { valid, feasible: valid && feasible, violations, ledger }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreemptionStats {
    pub preemption_points: u64,
    pub migrations: u64,
    pub jobs_completed: u64,
    pub average: Rational,
}

/// Preemptions and migrations of real jobs whose deadline is within the
/// trace horizon.
///
/// A job is preempted each time it stops with work left; completions are
/// not counted. Abutting pieces of one job form a single execution even when
/// they sit on different processors (that is a migration only).
pub fn count_preemptions(system: &TaskSystem, trace: &ScheduleTrace) -> PreemptionStats {
    let mut pieces: HashMap<(TaskId, u64), Vec<&Interval>> = HashMap::new();
    for iv in trace.level(0) {
        if let (Some(task), Some(job)) = (iv.task, iv.job) {
            pieces.entry((task, job)).or_default().push(iv);
        }
    }
    let mut points = 0u64;
    let mut migrations = 0u64;
    let mut jobs = 0u64;
    for t in system.real_tasks() {
        let mut j = 0u64;
        while t.release_of(j + 1) <= trace.horizon {
            jobs += 1;
            if let Some(list) = pieces.get_mut(&(t.id, j)) {
                list.sort_by(|a, b| a.start.cmp(&b.start));
                for w in list.windows(2) {
                    if w[1].start != w[0].end {
                        points += 1;
                    }
                    if w[1].proc != w[0].proc {
                        migrations += 1;
                    }
                }
            }
            j += 1;
        }
    }
    let average = if jobs == 0 { Rational::zero() } else { Rational::new(points as i64, jobs as i64) };
    PreemptionStats { preemption_points: points, migrations, jobs_completed: jobs, average }
}
