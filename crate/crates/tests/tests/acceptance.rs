//! Acceptance criteria. Each one prints a PASS or FAIL line; the process
//! exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use runsched::experiment::{run_batch, summarize_preemptions, ExperimentConfig, MetricsRow};
use runsched::oracle::brute_force_feasible;
use runsched::reduction::build_forest;
use runsched::server::{simulate_dedicated, DeadlineRule, Supply};
use runsched::validation::check_trace;
use runsched::*;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    let elapsed = start.elapsed();
    let (pass, detail) = match result {
        Ok(d) if elapsed <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over the {:.0?} budget", budget)),
        Err(e) => (false, e),
    };
    println!("{} [{id}] {name} ({:.2?}): {detail}", if pass { "PASS" } else { "FAIL" }, elapsed);
    pass
}

type Profile = Vec<(Rational, Rational, BTreeSet<String>)>;

fn expected_profile(rows: &[&[(&str, &str, &str)]], until: &Rational) -> Profile {
    let pieces: Vec<(String, Rational, Rational)> =
        rows.iter().flat_map(|row| row.iter().map(|&(l, a, b)| (l.to_string(), r(a), r(b)))).collect();
    profile(&pieces, until)
}

fn compare(level: u32, got: &Profile, want: &Profile) -> Result<(), String> {
    ensure(got == want, || {
        let show = |p: &Profile| p.iter().map(|(a, b, s)| format!("[{a},{b}){s:?}")).collect::<Vec<_>>().join(" ");
        format!("level {level}: got {} want {}", show(got), show(want))
    })
}

fn dual_example() -> Check {
    let sys = system(&[(1, "3", "2/3"), (2, "3", "2/3"), (3, "3", "2/3")], 2);
    let forest = build_forest(&sys, PackingHeuristic::WorstFitDecreasing).map_err(|e| e.to_string())?;
    ensure(forest.levels() == 1, || format!("{} reduction levels", forest.levels()))?;
    let h = r("3");
    let instants = check_step_invariants(&sys, &forest, &h)?;
    let run = Scheduler::with_horizon(&sys, &forest, &h).and_then(|s| s.run(&h)).map_err(|e| e.to_string())?;
    let report = check_trace(&sys, &run.trace);
    ensure(report.feasible, || report.to_text())?;
    let worst = preemptions_per_job(&run.trace).into_values().max().unwrap_or(0);
    ensure(worst <= 1, || format!("a job has {worst} preemption points"))?;

    let level0: &[(&str, &str, &str)] = &[("2", "0", "1"), ("3", "0", "2"), ("1", "1", "3"), ("2", "2", "3")];
    let level1: &[(&str, &str, &str)] = &[("1", "0", "1"), ("2", "1", "2"), ("3", "2", "3")];
    compare(0, &trace_profile(&forest, &run.trace, 0, &h), &expected_profile(&[level0], &h))?;
    compare(1, &trace_profile(&forest, &run.trace, 1, &h), &expected_profile(&[level1], &h))?;
    Ok(format!(
        "1 level, feasible, dual rule held at {instants} instants, max {worst} preemption per job, intervals match"
    ))
}

fn server_budgets() -> Check {
    let clients: Vec<FixedUtilizationTask> =
        [(1, 3), (2, 4), (3, 6)].iter().map(|&(id, p)| FixedUtilizationTask::periodic(id, p, 1).unwrap()).collect();
    let run = simulate_dedicated(&clients, Supply::Budgeted(r("3/4")), DeadlineRule::Dynamic, &r("12"))
        .map_err(|e| e.to_string())?;
    let deadlines = run.realized_deadlines();
    let want: Vec<Rational> = ["3", "6", "8", "12"].iter().map(|s| r(s)).collect();
    ensure(deadlines == want, || format!("server deadlines {deadlines:?}"))?;
    let budgets = run.budgets();
    let want: Vec<Rational> = ["9/4", "9/4", "3/2", "3"].iter().map(|s| r(s)).collect();
    ensure(budgets == want, || format!("budgets {budgets:?}"))?;
    ensure(run.is_feasible(), || format!("misses {:?}", run.misses))?;

    let show = |o: &[(TaskId, u64)]| o.iter().map(|(t, j)| format!("{}_{}", t.0, j + 1)).collect::<Vec<_>>().join(" ");
    let order = run.dispatch_order();
    let want: Vec<(TaskId, u64)> = [(1, 0), (2, 0), (3, 0), (1, 1), (2, 1), (1, 2), (3, 1), (1, 3), (2, 2)]
        .iter()
        .map(|&(t, j)| (TaskId(t), j))
        .collect();
    ensure(order == want, || {
        format!("deadlines and budgets match; run order {} differs from {}", show(&order), show(&want))
    })?;
    Ok(format!("deadlines {{3, 6, 8, 12}}, budgets {{9/4, 9/4, 3/2, 3}}, order {}", show(&order)))
}

fn multiset(v: &[Rational]) -> Vec<Rational> {
    let mut v = v.to_vec();
    v.sort();
    v
}

fn decimals(list: &str) -> Vec<Rational> {
    list.split_whitespace().map(|s| Rational::new((s.parse::<f64>().unwrap() * 10.0).round() as i64, 10)).collect()
}

/// `(row name, produced, expected)` for each row, and the levels of unit servers.
type Rows = (Vec<(&'static str, Vec<Rational>, Vec<Rational>)>, Vec<u32>);

fn ten_task_rows(h: PackingHeuristic) -> Result<Rows, String> {
    let utils = decimals(".6 .6 .6 .6 .6 .8 .6 .6 .5 .5");
    let tasks = utils
        .iter()
        .enumerate()
        .map(|(i, u)| FixedUtilizationTask::new(TaskId(i as u32 + 1), Rational::zero(), r("10"), u.clone()).unwrap())
        .collect();
    let sys = TaskSystem { tasks, processors: 6 };
    let forest = build_forest(&sys, h).map_err(|e| e.to_string())?;
    let row = |l: usize, packed: bool| -> Vec<Rational> {
        forest.rows.get(l).map(|r| if packed { r.packed.clone() } else { r.servers.clone() }).unwrap_or_default()
    };
    let rows = vec![
        ("psi0", row(0, false), decimals(".6 .6 .6 .6 .6 .8 .6 .6 .5 .5")),
        ("pack(psi0)", row(0, true), decimals(".6 .6 .6 .6 .6 .8 .6 .6 1")),
        ("psi1", row(1, false), decimals(".4 .4 .4 .4 .4 .2 .4 .4")),
        ("pack(psi1)", row(1, true), decimals(".8 .8 .4 1")),
        ("psi2", row(2, false), decimals(".2 .2 .6")),
        ("pack(psi2)", row(2, true), decimals("1")),
    ];
    let mut terminal = forest.root_levels();
    terminal.sort_unstable();
    Ok((rows, terminal))
}

fn ten_tasks() -> Check {
    let (rows, terminal) = ten_task_rows(PackingHeuristic::WorstFitDecreasing)?;
    let mut bad = Vec::new();
    for (name, got, want) in &rows {
        if multiset(got) != multiset(want) {
            let show = |v: &[Rational]| v.iter().map(|x| x.to_f64().to_string()).collect::<Vec<_>>().join(" ");
            bad.push(format!("{name} = {{{}}} want {{{}}}", show(got), show(want)));
        }
    }
    if terminal != [0, 1, 2] {
        bad.push(format!("unit servers at levels {terminal:?}, want [0, 1, 2]"));
    }
    if !bad.is_empty() {
        let note = match ten_task_rows(PackingHeuristic::WorstFit) {
            Ok((rows, t)) if rows.iter().all(|(_, g, w)| multiset(g) == multiset(w)) && t == [0, 1, 2] => {
                "; worst-fit in input order reproduces every row"
            }
            _ => "",
        };
        return Err(format!("worst-fit-decreasing: {}{note}", bad.join("; ")));
    }
    Ok("all six rows and terminal levels match".into())
}

fn five_tasks() -> Check {
    let sys = system(&[(1, "12", "3/5"), (2, "6", "3/5"), (3, "4", "3/5"), (4, "3", "3/5"), (5, "2", "3/5")], 3);
    let forest = build_forest(&sys, PackingHeuristic::WorstFitDecreasing).map_err(|e| e.to_string())?;
    ensure(forest.levels() == 2, || format!("{} reduction levels", forest.levels()))?;
    let h = r("12");
    let instants = check_step_invariants(&sys, &forest, &h)?;
    let run = Scheduler::with_horizon(&sys, &forest, &h).and_then(|s| s.run(&h)).map_err(|e| e.to_string())?;
    ensure(run.misses.is_empty(), || format!("misses {:?}", run.misses))?;
    let jobs = check_conservation(&sys, &run.trace)?;
    let due: usize = sys.tasks.iter().map(|t| (&h / &t.period).to_i64().unwrap() as usize).sum();
    ensure(jobs == due, || format!("{jobs} jobs checked, {due} due"))?;

    // the drawn window [0, 6); tasks 1..5 have periods 12, 6, 4, 3, 2
    let w = r("6");
    let l0: &[(&str, &str, &str)] = &[
        ("5", "0", "6/5"),
        ("4", "6/5", "3"),
        ("3", "3", "16/5"),
        ("5", "16/5", "17/5"),
        ("1", "17/5", "22/5"),
        ("4", "22/5", "24/5"),
        ("5", "24/5", "6"),
        ("3", "0", "9/5"),
        ("2", "9/5", "2"),
        ("5", "2", "3"),
        ("4", "3", "18/5"),
        ("3", "18/5", "26/5"),
        ("4", "26/5", "6"),
        ("1", "0", "13/5"),
        ("2", "13/5", "6"),
    ];
    let l1: &[(&str, &str, &str)] = &[
        ("2", "0", "9/5"),
        ("3", "9/5", "3"),
        ("5", "3", "16/5"),
        ("3", "16/5", "18/5"),
        ("4", "18/5", "22/5"),
        ("1", "22/5", "6"),
        ("4", "0", "6/5"),
        ("5", "6/5", "2"),
        ("2", "2", "13/5"),
        ("1", "13/5", "17/5"),
        ("5", "17/5", "24/5"),
        ("4", "24/5", "26/5"),
        ("3", "26/5", "6"),
    ];
    let l2: &[(&str, &str, &str)] = &[
        ("5", "0", "6/5"),
        ("3+4", "6/5", "9/5"),
        ("1+2", "9/5", "2"),
        ("5", "2", "3"),
        ("3+4", "3", "16/5"),
        ("5", "16/5", "17/5"),
        ("1+2", "17/5", "22/5"),
        ("3+4", "22/5", "24/5"),
        ("5", "24/5", "6"),
    ];
    for (level, rows) in [(0u32, l0), (1, l1), (2, l2)] {
        compare(level, &trace_profile(&forest, &run.trace, level, &w), &expected_profile(&[rows], &w))?;
    }
    Ok(format!(
        "2 levels, no misses, dual rule held at {instants} instants, {jobs} jobs conserved exactly, drawn window matches at 3 levels"
    ))
}

fn batch_levels(rows: &[MetricsRow]) -> Check {
    let misses: u64 = rows.iter().map(|r| r.misses).sum();
    let max_level = rows.iter().map(|r| r.levels).max().unwrap_or(0);
    let n17: BTreeSet<u32> = rows.iter().filter(|r| r.n == 17).map(|r| r.levels).collect();
    ensure(misses == 0, || format!("{misses} deadline misses"))?;
    ensure(max_level <= 2, || format!("maximum level {max_level}"))?;
    ensure(n17 == BTreeSet::from([1]), || format!("n = 17 levels {n17:?}"))?;
    let two = rows.iter().filter(|r| r.levels == 2).count();
    Ok(format!("{} sets, 0 misses, max level {max_level} ({two} sets at 2), n = 17 always 1 level", rows.len()))
}

fn batch_preemptions(rows: &[MetricsRow]) -> Check {
    let worst = rows.iter().max_by(|a, b| a.avg_preempt.total_cmp(&b.avg_preempt)).ok_or("empty batch")?;
    ensure(worst.avg_preempt <= 3.0, || format!("n = {} set {} averages {}", worst.n, worst.set, worst.avg_preempt))?;
    let summary = summarize_preemptions(rows);
    let high: Vec<_> = summary.iter().filter(|s| (52..=64).contains(&s.n)).collect();
    ensure(!high.is_empty(), || "no sets with n in [52, 64]".into())?;
    let top = high.iter().max_by(|a, b| a.median.total_cmp(&b.median)).unwrap();
    ensure(top.median < 1.7, || format!("median {} at n = {}", top.median, top.n))?;
    Ok(format!(
        "max average {:.3} (n = {}), largest median over n in [52, 64] {:.3} (n = {})",
        worst.avg_preempt, worst.n, top.median, top.n
    ))
}

fn properties() -> Check {
    let cases = 1000u64;
    for seed in 0..cases {
        let utils = random_utilizations(seed);
        for h in
            [PackingHeuristic::WorstFitDecreasing, PackingHeuristic::WorstFit, PackingHeuristic::FirstFitDecreasing]
        {
            check_reduction_bounds(&utils, h).map_err(|e| format!("bounds, seed {seed}, {h:?}: {e}"))?;
        }
    }
    let mut instants = 0;
    let mut jobs = 0;
    let mut mutants = 0;
    for seed in 0..cases {
        let sys = small_system(seed);
        let forest = build_forest(&sys, PackingHeuristic::WorstFitDecreasing).map_err(|e| e.to_string())?;
        let h = runsched::scheduler::default_horizon(&sys, 60);
        instants += check_step_invariants(&sys, &forest, &h).map_err(|e| format!("seed {seed}: {e}"))?;
        let run = Scheduler::with_horizon(&sys, &forest, &h).and_then(|s| s.run(&h)).map_err(|e| e.to_string())?;
        jobs += check_conservation(&sys, &run.trace).map_err(|e| format!("seed {seed}: {e}"))?;
        for (k, how) in MUTATIONS.iter().enumerate() {
            let mut bad = run.trace.clone();
            let Some(expect) = mutate(&sys, &mut bad, seed as usize + k, *how) else { continue };
            let report = check_trace(&sys, &bad);
            ensure(!report.feasible && report.violations.iter().any(|v| expect.contains(&v.rule)), || {
                format!("seed {seed}: {how:?} not caught: {}", report.to_text())
            })?;
            mutants += 1;
        }
    }
    Ok(format!(
        "{cases} utilization lists x 3 heuristics, {cases} systems: dual rule at {instants} instants, {jobs} jobs conserved, {mutants} corrupted traces rejected"
    ))
}

/// A fully utilized integer system with at most five tasks and a
/// hyperperiod dividing 60.
fn tiny_system(seed: u64) -> Option<TaskSystem> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    const PERIODS: [i64; 7] = [2, 3, 4, 5, 6, 10, 12];
    let m = rng.random_range(1..=2u32);
    let n = rng.random_range(m as usize + 1..=5);
    let mut tasks = Vec::new();
    let mut total = Rational::zero();
    for id in 1..n {
        let p = PERIODS[rng.random_range(0..PERIODS.len())];
        let c = rng.random_range(1..=p);
        let u = Rational::new(c, p);
        if &total + &u >= Rational::from(m) {
            break;
        }
        total += &u;
        tasks.push(FixedUtilizationTask::periodic(id as u32, p, c).unwrap());
    }
    let rest = Rational::from(m) - total;
    if rest > Rational::one() {
        return None;
    }
    let p = PERIODS.iter().copied().find(|&p| (&rest * &Rational::integer(p)).is_integer())?;
    let c = (&rest * &Rational::integer(p)).to_i64()?;
    tasks.push(FixedUtilizationTask::periodic(tasks.len() as u32 + 1, p, c).unwrap());
    Some(TaskSystem { tasks, processors: m })
}

fn oracle() -> Check {
    let mut checked = 0;
    let mut mutants = 0;
    let mut seed = 0u64;
    while checked < 250 {
        seed += 1;
        let Some(sys) = tiny_system(seed) else { continue };
        let oracle = brute_force_feasible(&sys, &Rational::one()).map_err(|e| format!("seed {seed}: {e}"))?;
        let h = Rational::from(sys.hyperperiod(60).ok_or("hyperperiod")? as u32);
        let (_, run) =
            runsched::scheduler::run(&sys, PackingHeuristic::WorstFitDecreasing, &h).map_err(|e| e.to_string())?;
        let report = check_trace(&sys, &run.trace);
        let ours = run.misses.is_empty() && report.feasible;
        ensure(oracle == ours, || format!("seed {seed}: oracle {oracle}, scheduler {ours}"))?;
        for (k, how) in MUTATIONS.iter().enumerate() {
            let mut bad = run.trace.clone();
            if mutate(&sys, &mut bad, k * 7 + seed as usize, *how).is_none() {
                continue;
            }
            ensure(!check_trace(&sys, &bad).feasible, || format!("seed {seed}: {how:?} accepted"))?;
            mutants += 1;
        }
        checked += 1;
    }
    // overloaded systems are infeasible for both
    let over = system(&[(1, "3", "1"), (2, "3", "1"), (3, "3", "1")], 2);
    ensure(brute_force_feasible(&over, &Rational::one()) == Ok(false), || "oracle accepts an overload".into())?;
    ensure(run(&over, PackingHeuristic::default(), &Rational::integer(12)).is_err(), || "overload scheduled".into())?;
    Ok(format!(
        "{checked} fully utilized instances agree, {mutants} corrupted traces rejected, overload refused by both"
    ))
}

fn main() {
    let second = Duration::from_secs(1);
    let mut ok = true;
    ok &= criterion(1, "two-processor dual example", second, dual_example);
    ok &= criterion(2, "dedicated EDF server budgets", second, server_budgets);
    ok &= criterion(3, "reduction table, ten tasks on six processors", second, ten_tasks);
    ok &= criterion(4, "five-task reduction schedule", second, five_tasks);

    let config = ExperimentConfig::default();
    let start = Instant::now();
    let batch = run_batch(&config);
    let batch_time = start.elapsed();
    let budget = Duration::from_secs(600).saturating_sub(batch_time);
    ok &= criterion(5, "reduction levels over the batch", budget, || {
        let rows = batch.as_ref().map_err(|e| e.to_string())?;
        batch_levels(rows).map(|d| format!("{d}; batch took {batch_time:.1?}"))
    });
    ok &= criterion(6, "preemptions per job over the batch", budget, || {
        batch_preemptions(batch.as_ref().map_err(|e| e.to_string())?)
    });
    ok &= criterion(7, "property suites", Duration::from_secs(600), properties);
    ok &= criterion(8, "oracle equivalence", Duration::from_secs(120), oracle);
    if !ok {
        std::process::exit(1);
    }
}
