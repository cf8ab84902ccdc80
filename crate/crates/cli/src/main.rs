use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use runsched::experiment::{
    run_batch, run_levels_experiment, summarize_levels, summarize_preemptions, write_csv, ExperimentConfig,
    ExperimentError,
};
use runsched::generator::{generate_taskfile, PeriodRange};
use runsched::scheduler::default_horizon;
use runsched::svg::render_svg;
use runsched::taskfile::TaskSetFile;
use runsched::validation::{check_trace, count_preemptions};
use runsched::*;

#[derive(Parser)]
#[command(name = "runsched", version, about = "Multiprocessor real-time scheduling by reduction to uniprocessors")]
struct Cli {
    /// Seed for generation and experiments.
    #[arg(long, global = true, env = "RUNSCHED_SEED", default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a task-set file and report misses and preemptions.
    Schedule(ScheduleArgs),
    /// Check a trace file for validity and feasibility.
    Verify {
        trace: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the reduction forest of a task-set file.
    Reduce {
        taskset: PathBuf,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a batch experiment and write its CSV.
    Experiment(ExperimentArgs),
    /// Emit a random task-set file.
    Generate {
        /// Number of tasks.
        #[arg(long, short)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        procs: u32,
        #[arg(long, default_value_t = 5)]
        period_min: u32,
        #[arg(long, default_value_t = 100)]
        period_max: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SystemArgs {
    /// Override the processor count of the file.
    #[arg(long)]
    procs: Option<u32>,
    #[arg(long, default_value = "wfd", value_parser = parse_packing)]
    packing: PackingHeuristic,
    /// Longest dummy period and default horizon.
    #[arg(long, default_value_t = 5000)]
    cap: u64,
}

#[derive(Args)]
struct ScheduleArgs {
    taskset: PathBuf,
    #[command(flatten)]
    system: SystemArgs,
    /// Simulation horizon, a fraction; defaults to the hyperperiod up to the cap.
    #[arg(long, value_parser = parse_rational)]
    horizon: Option<Rational>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long)]
    svg_out: Option<PathBuf>,
    #[arg(long)]
    dump_tree: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Statistic {
    Levels,
    Preemptions,
}

#[derive(Args)]
struct ExperimentArgs {
    statistic: Statistic,
    #[arg(long, default_value_t = 16)]
    procs: u32,
    /// Sets per task count.
    #[arg(long, default_value_t = 100)]
    sets: usize,
    /// A thousand sets per task count.
    #[arg(long)]
    full: bool,
    /// Task counts; defaults to 17, 18, 20, ..., 64.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Horizon cap for each simulation.
    #[arg(long, default_value_t = 5000)]
    horizon: u64,
    #[arg(long, default_value = "wfd", value_parser = parse_packing)]
    packing: PackingHeuristic,
    /// Also run the trace checker on every set.
    #[arg(long)]
    check: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_packing(s: &str) -> Result<PackingHeuristic, String> {
    s.parse()
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    let r: Rational = s.parse().map_err(|e| format!("{e}"))?;
    if !r.is_positive() {
        return Err("must be positive".into());
    }
    Ok(r)
}

/// Failures that are results rather than errors.
#[derive(Debug)]
struct Rejected(String);

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn load_system(path: &Path, args: &SystemArgs) -> Result<TaskSystem> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut file = TaskSetFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(m) = args.procs {
        file.processors = m;
    }
    Ok(file.to_system(&PaddingConfig { max_period: args.cap })?)
}

fn schedule(a: &ScheduleArgs) -> Result<()> {
    let system = load_system(&a.taskset, &a.system)?;
    let forest = build_forest(&system, a.system.packing)?;
    if let Some(p) = &a.dump_tree {
        emit(Some(p), &forest.dump())?;
    }
    let horizon = a.horizon.clone().unwrap_or_else(|| default_horizon(&system, a.system.cap));
    let run = Scheduler::with_horizon(&system, &forest, &horizon)?.run(&horizon)?;
    let report = check_trace(&system, &run.trace);
    let stats = count_preemptions(&system, &run.trace);

    let mut text = String::new();
    text.push_str(&format!("tasks {}\nprocessors {}\nhorizon {horizon}\n", system.tasks.len(), system.processors));
    text.push_str(&format!("levels {}\n", forest.levels()));
    text.push_str(&format!("jobs {}\npreemptions {}\n", stats.jobs_completed, stats.preemption_points));
    text.push_str(&format!("avg_preempt {:.4}\nmigrations {}\n", stats.average.to_f64(), stats.migrations));
    text.push_str(&format!("misses {}\n", run.misses.len()));
    for m in &run.misses {
        text.push_str(&format!(
            "miss task {} job {} deadline {} remaining {}\n",
            m.task, m.job, m.deadline, m.remaining
        ));
    }
    text.push_str(&report.to_text());
    emit(a.out.as_deref(), &text)?;

    if let Some(p) = &a.trace_out {
        emit(Some(p), &run.trace.to_text())?;
    }
    if let Some(p) = &a.svg_out {
        emit(Some(p), &render_svg(&run.trace))?;
    }
    if !run.misses.is_empty() || !report.feasible {
        bail!(Rejected(format!("{} deadline misses, trace feasible: {}", run.misses.len(), report.feasible)));
    }
    Ok(())
}

fn verify(path: &Path, out: Option<&Path>) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let trace = ScheduleTrace::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    let system = TaskSystem { tasks: trace.tasks.clone(), processors: trace.processors };
    let report = check_trace(&system, &trace);
    emit(out, &report.to_text())?;
    if !report.feasible {
        bail!(Rejected(format!("{} violations", report.violations.len())));
    }
    Ok(())
}

fn experiment(a: &ExperimentArgs, seed: u64) -> Result<()> {
    let mut config = ExperimentConfig {
        processors: a.procs,
        sets_per_n: if a.full { 1000 } else { a.sets },
        seed,
        horizon_cap: a.horizon,
        heuristic: a.packing,
        check_traces: a.check,
        ..ExperimentConfig::default()
    };
    if !a.n.is_empty() {
        config.n_values = a.n.clone();
    }
    if let Some(&n) = config.n_values.iter().find(|&&n| n <= config.processors as usize) {
        bail!("every task count must exceed the processor count, got {n}");
    }
    let mut csv = Vec::new();
    let mut summary = String::new();
    match a.statistic {
        Statistic::Levels => {
            let rows = run_levels_experiment(&config)?;
            csv.extend_from_slice(b"n,set,levels\n");
            for (n, s, l) in &rows {
                csv.extend_from_slice(format!("{n},{s},{l}\n").as_bytes());
            }
            summary.push_str("n sets one_level two_levels max_level\n");
            for s in summarize_levels(&rows) {
                summary.push_str(&format!(
                    "{} {} {:.2} {:.2} {}\n",
                    s.n, s.sets, s.frac_level1, s.frac_level2, s.max_level
                ));
            }
        }
        Statistic::Preemptions => {
            let rows = run_batch(&config)?;
            write_csv(&mut csv, &rows)?;
            summary.push_str("n min q1 median q3 max\n");
            for s in summarize_preemptions(&rows) {
                summary
                    .push_str(&format!("{} {:.3} {:.3} {:.3} {:.3} {:.3}\n", s.n, s.min, s.q1, s.median, s.q3, s.max));
            }
            if let Some(r) = rows.iter().find(|r| r.misses > 0) {
                emit(a.out.as_deref(), &String::from_utf8(csv)?)?;
                let e = ExperimentError::Misses { n: r.n, set: r.set, misses: r.misses };
                bail!(Rejected(e.to_string()));
            }
        }
    }
    emit(a.out.as_deref(), &String::from_utf8(csv)?)?;
    eprint!("{summary}");
    Ok(())
}

fn generate(n: usize, m: u32, min: u32, max: u32, seed: u64, out: Option<&Path>) -> Result<()> {
    if n <= m as usize {
        bail!("need more tasks than processors, got {n} on {m}");
    }
    let file = generate_taskfile(n, m, PeriodRange { min, max }, seed)?;
    emit(out, &file.to_toml())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Schedule(a) => schedule(a),
        Command::Verify { trace, out } => verify(trace, out.as_deref()),
        Command::Reduce { taskset, system, out } => load_system(taskset, system)
            .and_then(|s| Ok(build_forest(&s, system.packing)?))
            .and_then(|f| emit(out.as_deref(), &f.dump())),
        Command::Experiment(a) => experiment(a, cli.seed),
        Command::Generate { n, procs, period_min, period_max, out } => {
            generate(*n, *procs, *period_min, *period_max, cli.seed, out.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Rejected>() => {
            eprintln!("rejected: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
