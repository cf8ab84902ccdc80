//! On-line scheduling over a reduction forest.
//!
//! Every root is a unit server scheduling its clients by EDF on its own
//! virtual processor. Going down the forest, a pack node that executes
//! hands the processor to its earliest-deadline active client, and a dual
//! node inverts: its child executes exactly when the dual does not. The
//! leaves reached this way are the tasks running on the real processors.
//!
//! Time advances from event to event (job boundaries, server deadlines,
//! completions and budget exhaustions); the dispatch is recomputed from
//! scratch at each one.

use std::collections::HashMap;

use ethnum::I256;
use num_bigint::BigInt;
use thiserror::Error;

use crate::model::{TaskId, TaskSystem};
use crate::reduction::{build_forest, NodeId, NodeKind, PackingHeuristic, ReductionError, ReductionForest};
use crate::server::{guarded_deadline, ClientView, Miss};
use crate::ticks::{scale_of, to_ticks, width_for, Ticks, Width};
use crate::time::Rational;
use crate::trace::{Interval, ScheduleTrace};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("horizon must be positive, got {0}")]
    Horizon(Rational),
    #[error("the forest does not belong to this task system")]
    ForestMismatch,
    #[error("total utilization {total} does not match {processors} processors")]
    Capacity { total: Rational, processors: u32 },
    #[error("{selected} tasks selected at {t} for {processors} processors")]
    TooManySelected { t: Rational, selected: usize, processors: u32 },
    #[error("job {job} of task {task} executed past its requirement at {t}")]
    Overexecution { task: TaskId, job: i64, t: Rational },
}

/// Executing nodes after a dispatch, per level: leaves at level zero, dual
/// nodes above.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DispatchDecision {
    pub t: Rational,
    pub levels: Vec<Vec<NodeId>>,
}

/// Processor slots with affinity: a key selected again keeps its slot, new
/// keys fill free slots in ascending key order.
#[derive(Clone, Debug)]
pub struct ProcessorAssignment {
    slots: Vec<Option<u32>>,
    /// Last processor per key, `u32::MAX` if never placed.
    last: Vec<u32>,
    migrations: u64,
}

impl ProcessorAssignment {
    pub fn new(processors: u32) -> Self {
        ProcessorAssignment { slots: vec![None; processors as usize], last: Vec::new(), migrations: 0 }
    }

    pub fn slots(&self) -> &[Option<u32>] {
        &self.slots
    }

    /// Total number of times a key was placed on a processor other than the
    /// one it last ran on.
    pub fn migrations(&self) -> u64 {
        self.migrations
    }

    /// Returns the migrations caused by this step.
    pub fn assign(&mut self, selected: &[u32]) -> u64 {
        assert!(selected.len() <= self.slots.len(), "more keys than processors");
        for slot in self.slots.iter_mut() {
            if slot.is_some_and(|k| !selected.contains(&k)) {
                *slot = None;
            }
        }
        let mut fresh: Vec<u32> = selected.iter().copied().filter(|k| !self.slots.contains(&Some(*k))).collect();
        fresh.sort_unstable();
        let mut moved = 0;
        let mut free = (0..self.slots.len()).filter(|&p| self.slots[p].is_none()).collect::<Vec<_>>().into_iter();
        for k in fresh {
            let p = free.next().expect("a free processor");
            self.slots[p] = Some(k);
            if self.last.get(k as usize).is_some_and(|&q| q != u32::MAX && q != p as u32) {
                moved += 1;
            }
        }
        for (p, slot) in self.slots.iter().enumerate() {
            if let Some(k) = *slot {
                let k = k as usize;
                if self.last.len() <= k {
                    self.last.resize(k + 1, u32::MAX);
                }
                self.last[k] = p as u32;
            }
        }
        self.migrations += moved;
        moved
    }
}

/// Pure form of [`ProcessorAssignment::assign`] without migration history.
pub fn assign_processors(previous: &[Option<u32>], selected: &[u32]) -> Vec<Option<u32>> {
    let mut a = ProcessorAssignment::new(previous.len() as u32);
    a.slots = previous.to_vec();
    a.assign(selected);
    a.slots
}

/// Simulation state over integer ticks of `1 / scale`.
struct Core<'a, T: Ticks> {
    system: &'a TaskSystem,
    forest: &'a ReductionForest,
    scale: T,
    t: T,
    started: bool,
    /// Leaf: remaining work of the current job. Server: budget.
    budget: Vec<T>,
    /// Leaf: current job deadline. Server: server deadline.
    deadline: Vec<T>,
    executing: Vec<bool>,
    /// Server utilization as `numerator, denominator`.
    util: Vec<(T, T)>,
    /// Leaf only: task index, current job index, release, period and
    /// requirement.
    task_of: Vec<usize>,
    job: Vec<i64>,
    release: Vec<T>,
    period: Vec<T>,
    requirement: Vec<T>,
    start: Vec<T>,
    post_order: Vec<NodeId>,
    misses: Vec<Miss>,
    overruns: u64,
    events: u64,
}

impl<'a, T: Ticks> Core<'a, T> {
    fn new(system: &'a TaskSystem, forest: &'a ReductionForest, scale: &BigInt) -> Result<Self, ScheduleError> {
        let total = system.total_utilization();
        if total != Rational::from(system.processors) {
            return Err(ScheduleError::Capacity { total, processors: system.processors });
        }
        let n = forest.nodes.len();
        let index: HashMap<TaskId, usize> = system.tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
        let ticks = |r: &Rational| to_ticks::<T>(r, scale).ok_or(ScheduleError::ForestMismatch);
        let int = |v: BigInt| T::from_big(&v).ok_or(ScheduleError::ForestMismatch);
        let mut task_of = vec![usize::MAX; n];
        let mut period = vec![T::zero(); n];
        let mut requirement = vec![T::zero(); n];
        let mut start = vec![T::zero(); n];
        let mut leaves = 0;
        for (node, task) in forest.leaves() {
            let k = node.index();
            let i = *index.get(&task).ok_or(ScheduleError::ForestMismatch)?;
            let t = &system.tasks[i];
            task_of[k] = i;
            period[k] = ticks(&t.period)?;
            requirement[k] = ticks(&(&t.utilization * &t.period))?;
            start[k] = ticks(&t.start)?;
            leaves += 1;
        }
        if leaves != system.tasks.len() {
            return Err(ScheduleError::ForestMismatch);
        }
        let util = forest
            .nodes
            .iter()
            .map(|node| Ok((int(node.utilization.numer())?, int(node.utilization.denom())?)))
            .collect::<Result<Vec<_>, ScheduleError>>()?;
        Ok(Core {
            system,
            forest,
            scale: int(scale.clone())?,
            t: T::zero(),
            started: false,
            budget: vec![T::zero(); n],
            deadline: vec![T::zero(); n],
            executing: vec![false; n],
            util,
            task_of,
            job: vec![-1; n],
            release: vec![T::zero(); n],
            period,
            requirement,
            start,
            post_order: forest.bottom_up(),
            misses: Vec::new(),
            overruns: 0,
            events: 0,
        })
    }

    fn rational(&self, v: &T) -> Rational {
        v.ratio(&self.scale)
    }

    fn is_leaf(&self, k: usize) -> bool {
        self.task_of[k] != usize::MAX
    }

    fn pack_deadline(&self, children: &[NodeId]) -> T {
        let views: Vec<ClientView<T>> = children
            .iter()
            .map(|c| {
                let k = c.index();
                let skipped = (self.is_leaf(k) && self.release[k] < self.t && self.budget[k].is_zero())
                    .then(|| self.deadline[k].add(&self.period[k]));
                ClientView { deadline: self.deadline[k].clone(), skipped }
            })
            .collect();
        guarded_deadline(&self.t, &views).expect("pack nodes have clients")
    }

    /// `utilization * (d - t)` for server `k`.
    fn allotment(&self, k: usize, window: &T) -> T {
        let (p, q) = &self.util[k];
        window.div_exact(q).mul(p)
    }

    /// Bring job and server state up to date at the current instant.
    fn settle(&mut self) {
        let first = !self.started;
        self.started = true;
        for k in 0..self.forest.nodes.len() {
            if !self.is_leaf(k) {
                continue;
            }
            if first {
                if self.start[k].is_positive() {
                    // nothing to do before the first release
                    self.deadline[k] = self.start[k].clone();
                } else {
                    self.job[k] = 0;
                    self.deadline[k] = self.start[k].add(&self.period[k]);
                    self.budget[k] = self.requirement[k].clone();
                }
            } else if self.deadline[k] == self.t {
                if self.job[k] >= 0 && self.budget[k].is_positive() {
                    self.misses.push(Miss {
                        task: self.system.tasks[self.task_of[k]].id,
                        job: self.job[k] as u64,
                        deadline: self.rational(&self.t),
                        remaining: self.rational(&self.budget[k]),
                    });
                }
                self.job[k] += 1;
                self.release[k] = self.t.clone();
                self.deadline[k] = self.t.add(&self.period[k]);
                self.budget[k] = self.requirement[k].clone();
            }
        }
        for i in 0..self.post_order.len() {
            let id = self.post_order[i];
            let k = id.index();
            let node = self.forest.node(id);
            if node.kind != NodeKind::Pack || !(first || self.deadline[k] == self.t) {
                continue;
            }
            let d = self.pack_deadline(&node.children);
            let window = d.sub(&self.t);
            self.budget[k] = self.allotment(k, &window);
            if let Some(p) = node.parent {
                if self.forest.node(p).kind == NodeKind::Dual {
                    self.budget[p.index()] = self.allotment(p.index(), &window);
                    self.deadline[p.index()] = d.clone();
                }
            }
            self.deadline[k] = d;
        }
    }

    fn dispatch_at(&mut self) -> Result<DispatchDecision, ScheduleError> {
        if !self.started {
            self.settle();
        }
        let f = self.forest;
        for k in 0..f.nodes.len() {
            let node = &f.nodes[k];
            match node.kind {
                NodeKind::Task(_) => {}
                NodeKind::Pack => {
                    if node.parent.is_none() {
                        self.executing[k] = true;
                    }
                    let pick = if self.executing[k] {
                        node.children
                            .iter()
                            .filter(|c| self.budget[c.index()].is_positive())
                            .min_by(|a, b| self.deadline[a.index()].cmp(&self.deadline[b.index()]).then(a.cmp(b)))
                            .copied()
                    } else {
                        None
                    };
                    for c in &node.children {
                        self.executing[c.index()] = Some(*c) == pick;
                    }
                }
                NodeKind::Dual => {
                    self.executing[node.children[0].index()] = !self.executing[k];
                }
            }
        }
        let mut out = vec![Vec::new(); f.levels() as usize + 1];
        for node in &f.nodes {
            if !self.executing[node.id.index()] {
                continue;
            }
            match node.kind {
                NodeKind::Task(_) => out[0].push(node.id),
                NodeKind::Dual => out[node.level as usize].push(node.id),
                NodeKind::Pack => {}
            }
        }
        if out[0].len() > self.system.processors as usize {
            return Err(ScheduleError::TooManySelected {
                t: self.rational(&self.t),
                selected: out[0].len(),
                processors: self.system.processors,
            });
        }
        Ok(DispatchDecision { t: self.rational(&self.t), levels: out })
    }

    fn next_event(&self, horizon: &T) -> T {
        let mut next = horizon;
        let mut exhaust: Option<T> = None;
        for (k, node) in self.forest.nodes.iter().enumerate() {
            if node.kind != NodeKind::Dual && self.deadline[k] < *next {
                next = &self.deadline[k];
            }
            let runs_out = match node.kind {
                NodeKind::Task(_) => self.executing[k],
                NodeKind::Dual => self.executing[k] && self.budget[k].is_positive(),
                NodeKind::Pack => false,
            };
            if runs_out && exhaust.as_ref().is_none_or(|e| self.budget[k] < *e) {
                exhaust = Some(self.budget[k].clone());
            }
        }
        match exhaust {
            Some(e) => {
                let at = self.t.add(&e);
                if at < *next {
                    at
                } else {
                    next.clone()
                }
            }
            None => next.clone(),
        }
    }

    fn advance_to(&mut self, t: T) -> Result<(), ScheduleError> {
        debug_assert!(t > self.t, "time must move forward");
        let dt = t.sub(&self.t);
        for k in 0..self.forest.nodes.len() {
            if !self.executing[k] {
                continue;
            }
            if self.budget[k] < dt {
                if self.is_leaf(k) {
                    return Err(ScheduleError::Overexecution {
                        task: self.system.tasks[self.task_of[k]].id,
                        job: self.job[k],
                        t: self.rational(&t),
                    });
                }
                self.overruns += 1;
            }
            self.budget[k] = self.budget[k].sub(&dt);
        }
        self.t = t;
        self.events += 1;
        self.settle();
        Ok(())
    }

    fn run(mut self, horizon: &Rational) -> Result<Run, ScheduleError> {
        let end: T = to_ticks(horizon, &self.scale.to_big()).ok_or(ScheduleError::Horizon(horizon.clone()))?;
        let forest = self.forest;
        let levels = forest.levels();
        let mut recorder = Recorder::new((0..=levels).map(|l| forest.processors_at(l)).collect());
        while self.t < end {
            let decision = self.dispatch_at()?;
            let next = self.next_event(&end);
            let mut now: Option<Rational> = None;
            for (level, nodes) in decision.levels.iter().enumerate() {
                let occupants: Vec<Occupant> = nodes
                    .iter()
                    .map(|&id| match forest.node(id).kind {
                        NodeKind::Task(task) => {
                            Occupant { key: task.0, node: id, task: Some(task), job: Some(self.job[id.index()] as u64) }
                        }
                        _ => Occupant { key: id.0, node: id, task: None, job: None },
                    })
                    .collect();
                recorder
                    .record(level, &occupants, &mut || now.get_or_insert_with(|| self.t.ratio(&self.scale)).clone());
            }
            recorder.event += 1;
            self.advance_to(next)?;
        }
        let trace = recorder.finish(self.system, horizon.clone());
        Ok(Run { trace, misses: self.misses, overruns: self.overruns, events: self.events })
    }
}

enum Engine<'a> {
    Narrow(Core<'a, i128>),
    Wide(Core<'a, I256>),
    Big(Core<'a, BigInt>),
}

macro_rules! with_core {
    ($self:expr, $c:ident => $body:expr) => {
        match $self {
            Engine::Narrow($c) => $body,
            Engine::Wide($c) => $body,
            Engine::Big($c) => $body,
        }
    };
}

/// Step-by-step access to a simulation. Times are exact rationals; the
/// arithmetic underneath uses the narrowest integer type that fits.
pub struct Scheduler<'a> {
    engine: Engine<'a>,
}

impl<'a> Scheduler<'a> {
    /// A scheduler sized for horizons up to `max_horizon`.
    pub fn with_horizon(
        system: &'a TaskSystem,
        forest: &'a ReductionForest,
        max_horizon: &Rational,
    ) -> Result<Self, ScheduleError> {
        let scale = scale_of(system);
        let engine = match width_for(system, &scale, max_horizon) {
            Width::I128 => Engine::Narrow(Core::new(system, forest, &scale)?),
            Width::I256 => Engine::Wide(Core::new(system, forest, &scale)?),
            Width::Big => Engine::Big(Core::new(system, forest, &scale)?),
        };
        Ok(Scheduler { engine })
    }

    /// A scheduler with arbitrary-precision time.
    pub fn new(system: &'a TaskSystem, forest: &'a ReductionForest) -> Result<Self, ScheduleError> {
        Ok(Scheduler { engine: Engine::Big(Core::new(system, forest, &scale_of(system))?) })
    }

    pub fn time(&self) -> Rational {
        with_core!(&self.engine, c => c.rational(&c.t))
    }

    pub fn is_executing(&self, node: NodeId) -> bool {
        with_core!(&self.engine, c => c.executing[node.index()])
    }

    /// Budget of a server, or remaining work of a leaf's current job.
    pub fn budget(&self, node: NodeId) -> Rational {
        with_core!(&self.engine, c => c.rational(&c.budget[node.index()]))
    }

    pub fn deadline(&self, node: NodeId) -> Rational {
        with_core!(&self.engine, c => c.rational(&c.deadline[node.index()]))
    }

    pub fn misses(&self) -> &[Miss] {
        with_core!(&self.engine, c => &c.misses)
    }

    /// Times a pack server ran with an empty budget.
    pub fn overruns(&self) -> u64 {
        with_core!(&self.engine, c => c.overruns)
    }

    pub fn events(&self) -> u64 {
        with_core!(&self.engine, c => c.events)
    }

    /// Top-down unpacking of the forest at the current instant.
    pub fn dispatch_at(&mut self) -> Result<DispatchDecision, ScheduleError> {
        with_core!(&mut self.engine, c => c.dispatch_at())
    }

    /// Next instant at which the dispatch can change, capped at `horizon`.
    pub fn next_event(&self, horizon: &Rational) -> Rational {
        with_core!(&self.engine, c => {
            let h = to_ticks(horizon, &c.scale.to_big()).expect("horizon on the time grid");
            c.rational(&c.next_event(&h))
        })
    }

    /// Execute the current dispatch until `t` and settle the new instant.
    pub fn advance_to(&mut self, t: &Rational) -> Result<(), ScheduleError> {
        with_core!(&mut self.engine, c => {
            let t = to_ticks(t, &c.scale.to_big()).ok_or(ScheduleError::Horizon(t.clone()))?;
            c.advance_to(t)
        })
    }

    /// Simulate `[0, horizon)` and record every level.
    pub fn run(self, horizon: &Rational) -> Result<Run, ScheduleError> {
        if !horizon.is_positive() {
            return Err(ScheduleError::Horizon(horizon.clone()));
        }
        with_core!(self.engine, c => c.run(horizon))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub trace: ScheduleTrace,
    pub misses: Vec<Miss>,
    pub overruns: u64,
    pub events: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Occupant {
    key: u32,
    node: NodeId,
    task: Option<TaskId>,
    job: Option<u64>,
}

struct Recorder {
    assignment: Vec<ProcessorAssignment>,
    /// Open interval per level and processor, with the event it began at.
    open: Vec<Vec<Option<(Occupant, Rational, u64)>>>,
    intervals: Vec<(u64, Interval)>,
    event: u64,
}

impl Recorder {
    fn new(processors: Vec<u32>) -> Self {
        Recorder {
            open: processors.iter().map(|&p| vec![None; p as usize]).collect(),
            assignment: processors.into_iter().map(ProcessorAssignment::new).collect(),
            intervals: Vec::new(),
            event: 0,
        }
    }

    fn record(&mut self, level: usize, occupants: &[Occupant], now: &mut dyn FnMut() -> Rational) {
        let keys: Vec<u32> = occupants.iter().map(|o| o.key).collect();
        self.assignment[level].assign(&keys);
        for p in 0..self.open[level].len() {
            let occupant = self.assignment[level].slots()[p].and_then(|k| occupants.iter().find(|o| o.key == k));
            let same = match (&self.open[level][p], occupant) {
                (Some((o, _, _)), Some(n)) => o == n,
                (None, None) => true,
                _ => false,
            };
            if same {
                continue;
            }
            let t = now();
            if let Some((o, start, seq)) = self.open[level][p].take() {
                self.close(level, p, o, start, seq, t.clone());
            }
            self.open[level][p] = occupant.map(|n| (n.clone(), t, self.event));
        }
    }

    fn close(&mut self, level: usize, proc: usize, o: Occupant, start: Rational, seq: u64, end: Rational) {
        self.intervals.push((
            seq,
            Interval { level: level as u32, proc: proc as u32, node: o.node, task: o.task, job: o.job, start, end },
        ));
    }

    fn finish(mut self, system: &TaskSystem, horizon: Rational) -> ScheduleTrace {
        for level in 0..self.open.len() {
            for p in 0..self.open[level].len() {
                if let Some((o, start, seq)) = self.open[level][p].take() {
                    self.close(level, p, o, start, seq, horizon.clone());
                }
            }
        }
        let level_processors = self.assignment.iter().map(|a| a.slots().len() as u32).collect();
        // start times grow with the event sequence, so this is start order
        self.intervals.sort_by_key(|(seq, iv)| (iv.level, *seq, iv.proc));
        ScheduleTrace {
            processors: system.processors,
            horizon,
            tasks: system.tasks.clone(),
            level_processors,
            intervals: self.intervals.into_iter().map(|(_, iv)| iv).collect(),
        }
    }
}

/// Reduce `system` with `heuristic` and simulate it over `[0, horizon)`.
pub fn run(
    system: &TaskSystem,
    heuristic: PackingHeuristic,
    horizon: &Rational,
) -> Result<(ReductionForest, Run), ScheduleError> {
    let forest = build_forest(system, heuristic)?;
    let run = Scheduler::with_horizon(system, &forest, horizon)?.run(horizon)?;
    Ok((forest, run))
}

/// `min(hyperperiod, cap)`.
pub fn default_horizon(system: &TaskSystem, cap: u64) -> Rational {
    Rational::integer(system.hyperperiod(cap).unwrap_or(cap).min(cap).max(1) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pad_to_full_utilization, FixedUtilizationTask, PaddingConfig};

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn periodic(list: &[(i64, i64)], m: u32) -> TaskSystem {
        let tasks = list
            .iter()
            .enumerate()
            .map(|(i, &(c, p))| FixedUtilizationTask::periodic(i as u32 + 1, p, c).unwrap())
            .collect();
        pad_to_full_utilization(tasks, m, &PaddingConfig::default()).unwrap()
    }

    fn leaf_tasks(forest: &ReductionForest, nodes: &[NodeId]) -> Vec<u32> {
        let mut out: Vec<u32> = nodes
            .iter()
            .map(|&n| match forest.node(n).kind {
                NodeKind::Task(t) => t.0,
                _ => panic!("not a leaf"),
            })
            .collect();
        out.sort_unstable();
        out
    }

    #[test]
    fn first_dispatch_idles_task_one() {
        let sys = periodic(&[(2, 3), (2, 3), (2, 3)], 2);
        let forest = build_forest(&sys, PackingHeuristic::WorstFitDecreasing).unwrap();
        let mut s = Scheduler::new(&sys, &forest).unwrap();
        let d = s.dispatch_at().unwrap();
        assert_eq!(leaf_tasks(&forest, &d.levels[0]), vec![2, 3]);
        assert_eq!(d.levels[1].len(), 1);
        assert_eq!(s.next_event(&r("3")), r("1"));
    }

    #[test]
    fn unit_task_always_runs() {
        let sys = periodic(&[(5, 5)], 1);
        let (_, run) = run(&sys, PackingHeuristic::WorstFitDecreasing, &r("20")).unwrap();
        assert!(run.misses.is_empty());
        assert_eq!(run.trace.intervals.len(), 4);
        assert!(run.trace.intervals.iter().all(|iv| iv.task == Some(TaskId(1))));
    }

    #[test]
    fn next_event_falls_back_to_deadline() {
        // one task of utilization 1/2 plus a dummy: the earliest timer is 2
        let sys = periodic(&[(1, 2)], 1);
        let forest = build_forest(&sys, PackingHeuristic::WorstFitDecreasing).unwrap();
        let mut s = Scheduler::new(&sys, &forest).unwrap();
        s.dispatch_at().unwrap();
        assert!(s.next_event(&r("100")) <= r("2"));
    }

    #[test]
    fn affinity_examples() {
        assert_eq!(assign_processors(&[Some(1), Some(2)], &[1, 2]), vec![Some(1), Some(2)]);
        assert_eq!(assign_processors(&[Some(2), Some(3)], &[3, 1]), vec![Some(1), Some(3)]);
        assert_eq!(assign_processors(&[Some(7)], &[8]), vec![Some(8)]);
        assert_eq!(assign_processors(&[None, None], &[5, 4]), vec![Some(4), Some(5)]);

        let mut a = ProcessorAssignment::new(2);
        assert_eq!(a.assign(&[2, 3]), 0);
        assert_eq!(a.assign(&[1, 3]), 0);
        // 2 comes back on the other processor
        assert_eq!(a.assign(&[1, 2]), 1);
        assert_eq!(a.migrations(), 1);
    }

    #[test]
    fn rejects_bad_horizon() {
        let sys = periodic(&[(1, 1)], 1);
        assert!(matches!(run(&sys, PackingHeuristic::WorstFit, &Rational::zero()), Err(ScheduleError::Horizon(_))));
    }

    #[test]
    fn delayed_start_is_supported() {
        let mut sys = periodic(&[(2, 3), (2, 3), (2, 3)], 2);
        sys.tasks[0].start = r("1");
        sys.tasks[1].start = r("1/2");
        let (_, run) = run(&sys, PackingHeuristic::WorstFit, &r("13")).unwrap();
        assert!(run.misses.is_empty());
    }
}
