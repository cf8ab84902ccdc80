#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use runsched::generator::{generate_taskset, PeriodRange};
use runsched::reduction::{dual_utilization, is_packed, pack};
use runsched::validation::{check_trace, Rule};
use runsched::*;

pub fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn system(list: &[(u32, &str, &str)], m: u32) -> TaskSystem {
    let tasks = list
        .iter()
        .map(|&(id, period, u)| FixedUtilizationTask::new(TaskId(id), Rational::zero(), r(period), r(u)).unwrap())
        .collect();
    TaskSystem { tasks, processors: m }
}

/// A small fully utilized system: 1 to 4 processors, periods 2 to 12.
pub fn small_system(seed: u64) -> TaskSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=4u32);
    let n = rng.random_range(m as usize..=m as usize + 5);
    let padding = PaddingConfig { max_period: 60 };
    // short periods cannot always be rounded to integer requirements; redraw
    loop {
        if let Ok(sys) = generate_taskset(n, m, PeriodRange { min: 2, max: 12 }, rng.random(), &padding) {
            return sys;
        }
    }
}

/// Up to a dozen utilizations in `(0, 1]` with small denominators.
pub fn random_utilizations(seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rng.random_range(1..=12);
    (0..len)
        .map(|_| {
            let q = rng.random_range(1..=12i64);
            Rational::new(rng.random_range(1..=q), q)
        })
        .collect()
}

/// Packing, dual and contraction bounds on one utilization list.
pub fn check_reduction_bounds(utils: &[Rational], h: PackingHeuristic) -> Result<(), String> {
    let total: Rational = utils.iter().sum();
    let bins = pack(utils, h).map_err(|e| e.to_string())?;
    let packed: Vec<Rational> = bins.iter().map(|b| b.iter().map(|&i| &utils[i]).sum()).collect();

    let mut seen: Vec<usize> = bins.iter().flatten().copied().collect();
    seen.sort_unstable();
    if seen != (0..utils.len()).collect::<Vec<_>>() {
        return Err(format!("bins {bins:?} do not partition {} servers", utils.len()));
    }
    if packed.iter().any(|u| *u > Rational::one()) {
        return Err(format!("overfull bin in {packed:?}"));
    }
    let packed_total: Rational = packed.iter().sum();
    if packed_total != total {
        return Err(format!("packing changed utilization {total} to {packed_total}"));
    }
    if Rational::from(packed.len() as u32) < total {
        return Err(format!("{} bins hold utilization {total}", packed.len()));
    }
    if !is_packed(&packed) {
        return Err(format!("{packed:?} is not packed"));
    }
    if packed.len() > 1 && Rational::from(packed.len() as u32) >= &total + &total {
        return Err(format!("packed set of {} servers has utilization {total}", packed.len()));
    }
    if packed.len() > 1 {
        let dual_total: Rational = packed.iter().map(|u| Rational::one() - u).sum();
        if dual_total >= Rational::new(packed.len() as i64 + 1, 2) {
            return Err(format!("dual utilization {dual_total} of {} servers", packed.len()));
        }
    }
    let non_unit: Vec<Rational> = packed.iter().filter(|u| **u != Rational::one()).cloned().collect();
    if !non_unit.is_empty() {
        let duals: Vec<Rational> = non_unit.iter().map(|u| dual_utilization(u).unwrap()).collect();
        let reduced = pack(&duals, h).map_err(|e| e.to_string())?.len();
        if reduced > (non_unit.len() + 2) / 2 {
            return Err(format!("{} non-unit servers reduce to {reduced}", non_unit.len()));
        }
    }
    Ok(())
}

/// Steps the scheduler to `horizon`, checking the dual rule and the
/// processor count of every level at each instant. Returns the number of
/// instants visited.
pub fn check_step_invariants(system: &TaskSystem, forest: &ReductionForest, horizon: &Rational) -> Result<u64, String> {
    let mut s = Scheduler::with_horizon(system, forest, horizon).map_err(|e| e.to_string())?;
    let mut instants = 0;
    while s.time() < *horizon {
        let decision = s.dispatch_at().map_err(|e| e.to_string())?;
        let t = s.time();
        for node in &forest.nodes {
            if node.kind == NodeKind::Dual {
                let child = node.children[0];
                if s.is_executing(node.id) == s.is_executing(child) {
                    return Err(format!(
                        "t = {t}: dual {} and child {child} both {}",
                        node.id,
                        s.is_executing(node.id)
                    ));
                }
            }
        }
        for (level, nodes) in decision.levels.iter().enumerate() {
            let expected = forest.processors_at(level as u32) as usize;
            if nodes.len() != expected {
                return Err(format!("t = {t}: {} servers run at level {level} on {expected} processors", nodes.len()));
            }
        }
        let next = s.next_event(horizon);
        if next <= t {
            return Err(format!("time does not advance at {t}"));
        }
        s.advance_to(&next).map_err(|e| e.to_string())?;
        instants += 1;
    }
    if !s.misses().is_empty() {
        return Err(format!("misses: {:?}", s.misses()));
    }
    Ok(instants)
}

/// Every job with a deadline inside the trace ran exactly its requirement.
pub fn check_conservation(system: &TaskSystem, trace: &ScheduleTrace) -> Result<usize, String> {
    let report = check_trace(system, trace);
    if !report.feasible {
        return Err(report.to_text());
    }
    let mut jobs = 0;
    for t in &system.tasks {
        let requirement = &t.utilization * &t.period;
        let mut j = 0;
        while t.release_of(j + 1) <= trace.horizon {
            let done = report.ledger.get(&(t.id, j)).cloned().unwrap_or_default();
            if done != requirement {
                return Err(format!("job {j} of task {} ran {done} of {requirement}", t.id));
            }
            jobs += 1;
            j += 1;
        }
    }
    Ok(jobs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    Drop,
    Shrink,
    Stretch,
    Relabel,
    Duplicate,
    BadProcessor,
}

pub const MUTATIONS: [Mutation; 6] = [
    Mutation::Drop,
    Mutation::Shrink,
    Mutation::Stretch,
    Mutation::Relabel,
    Mutation::Duplicate,
    Mutation::BadProcessor,
];

/// Corrupts `trace` at one level-zero interval of a job due within the
/// horizon. Returns the rules of which at least one must be reported.
pub fn mutate(system: &TaskSystem, trace: &mut ScheduleTrace, pick: usize, how: Mutation) -> Option<Vec<Rule>> {
    let candidates: Vec<usize> = (0..trace.intervals.len())
        .filter(|&i| {
            let iv = &trace.intervals[i];
            iv.level == 0 && {
                let t = system.task(iv.task.unwrap()).unwrap();
                t.release_of(iv.job.unwrap() + 1) <= trace.horizon
            }
        })
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let i = candidates[pick % candidates.len()];
    let m = system.processors;
    let iv = trace.intervals[i].clone();
    let len = &iv.end - &iv.start;
    let expected = match how {
        Mutation::Drop => {
            trace.intervals.remove(i);
            vec![Rule::DeadlineMiss]
        }
        Mutation::Shrink => {
            trace.intervals[i].end = &iv.start + &(&len / &Rational::integer(2));
            vec![Rule::DeadlineMiss]
        }
        Mutation::Stretch => {
            let half = &len / &Rational::integer(2);
            if iv.start >= half {
                trace.intervals[i].start = &iv.start - &half;
            } else {
                trace.intervals[i].end = &iv.end + &half;
            }
            vec![Rule::Overexecution, Rule::Exclusivity, Rule::Parallel, Rule::Inactive, Rule::Malformed]
        }
        Mutation::Relabel => {
            trace.intervals[i].job = Some(iv.job.unwrap() + 1);
            vec![Rule::Inactive]
        }
        Mutation::Duplicate => {
            let mut copy = iv.clone();
            copy.proc = (iv.proc + 1) % m;
            trace.intervals.push(copy);
            vec![if m > 1 { Rule::Parallel } else { Rule::Exclusivity }]
        }
        Mutation::BadProcessor => {
            trace.intervals[i].proc = m;
            vec![Rule::Malformed]
        }
    };
    Some(expected)
}

/// Merges labelled pieces into maximal spans with a constant label set.
pub fn profile(
    pieces: &[(String, Rational, Rational)],
    until: &Rational,
) -> Vec<(Rational, Rational, BTreeSet<String>)> {
    let mut cuts: BTreeSet<Rational> = BTreeSet::new();
    cuts.insert(Rational::zero());
    cuts.insert(until.clone());
    for (_, a, b) in pieces {
        if a < until {
            cuts.insert(a.clone());
        }
        if b < until {
            cuts.insert(b.clone());
        }
    }
    let cuts: Vec<Rational> = cuts.into_iter().collect();
    let mut out: Vec<(Rational, Rational, BTreeSet<String>)> = Vec::new();
    for w in cuts.windows(2) {
        let set: BTreeSet<String> =
            pieces.iter().filter(|(_, a, b)| *a <= w[0] && w[1] <= *b).map(|(l, _, _)| l.clone()).collect();
        match out.last_mut() {
            Some(last) if last.2 == set => last.1 = w[1].clone(),
            _ => out.push((w[0].clone(), w[1].clone(), set)),
        }
    }
    out
}

/// Label of a trace interval: the task at level zero, else the sorted
/// tasks below the server.
pub fn label(forest: &ReductionForest, iv: &Interval) -> String {
    if let Some(t) = iv.task {
        return t.0.to_string();
    }
    let mut leaves = Vec::new();
    let mut stack = vec![iv.node];
    while let Some(n) = stack.pop() {
        let node = forest.node(n);
        match node.kind {
            NodeKind::Task(t) => leaves.push(t.0),
            _ => stack.extend(node.children.iter().copied()),
        }
    }
    leaves.sort_unstable();
    leaves.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("+")
}

pub fn trace_profile(
    forest: &ReductionForest,
    trace: &ScheduleTrace,
    level: u32,
    until: &Rational,
) -> Vec<(Rational, Rational, BTreeSet<String>)> {
    let pieces: Vec<(String, Rational, Rational)> =
        trace.level(level).map(|iv| (label(forest, iv), iv.start.clone(), iv.end.clone())).collect();
    profile(&pieces, until)
}

/// Preemption points per job, computed directly from the trace.
pub fn preemptions_per_job(trace: &ScheduleTrace) -> BTreeMap<(TaskId, u64), u64> {
    let mut pieces: BTreeMap<(TaskId, u64), Vec<(Rational, Rational)>> = BTreeMap::new();
    for iv in trace.level(0) {
        pieces.entry((iv.task.unwrap(), iv.job.unwrap())).or_default().push((iv.start.clone(), iv.end.clone()));
    }
    pieces
        .into_iter()
        .map(|(k, mut v)| {
            v.sort();
            (k, v.windows(2).filter(|w| w[0].1 != w[1].0).count() as u64)
        })
        .collect()
}
