//! Fixed-utilization EDF servers.
//!
//! A server owns a budget that is replenished at each of its deadlines to
//! `utilization * (next deadline - now)` and dispenses it to its clients by
//! EDF. The next deadline is chosen dynamically from the client job states:
//! deadlines of jobs that already completed are skipped, so the realized
//! deadline set is only a subset of the clients' deadlines. A skip is undone
//! when work due later could otherwise run ahead of the release it hides.

use thiserror::Error;

use crate::model::{FixedUtilizationTask, Job, TaskId};
use crate::time::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ServerError {
    #[error("server {server}: replenishment at {t} is not a deadline (current deadline {deadline})")]
    NotADeadline { server: u32, t: Rational, deadline: Rational },
    #[error("server {server}: scale factor {alpha} outside (0, {max}]")]
    ScaleOutOfRange { server: u32, alpha: Rational, max: Rational },
    #[error("server {server}: utilization {utilization} outside (0, 1]")]
    Utilization { server: u32, utilization: Rational },
    #[error("server has no clients")]
    NoClients,
}

/// What a server needs to know about one client to pick its next deadline.
#[derive(Clone, Debug)]
pub struct ClientDeadline<'a> {
    pub release: &'a Rational,
    pub deadline: &'a Rational,
    pub complete: bool,
    /// Deadline of the client's following job.
    pub following: &'a Rational,
}

impl ClientDeadline<'_> {
    fn skips(&self, t: &Rational) -> bool {
        self.release < t && self.complete
    }

    /// The client's earliest deadline among jobs not completed at `t`,
    /// counting jobs released at or after `t`.
    pub fn candidate(&self, t: &Rational) -> Rational {
        if self.skips(t) {
            self.following.clone()
        } else {
            self.deadline.clone()
        }
    }
}

/// One client as seen by [`guarded_deadline`]: its current job deadline
/// and, when that job already completed, the deadline of the next one.
#[derive(Clone, Debug)]
pub struct ClientView<D> {
    pub deadline: D,
    pub skipped: Option<D>,
}

/// Earliest deadline among client jobs not yet completed at `t`, counting
/// jobs released later, unless skipping a completed job's deadline lets
/// work due later run ahead of the job released there. The window is then
/// cut at the earliest such release.
pub fn guarded_deadline<D: Ord + Clone>(t: &D, clients: &[ClientView<D>]) -> Option<D> {
    let candidate = |c: &ClientView<D>| c.skipped.as_ref().unwrap_or(&c.deadline).clone();
    let lambda = clients.iter().map(candidate).filter(|d| d > t).min()?;
    // (available from, deadline) of each client's next piece of work
    let work: Vec<(&D, D)> =
        clients.iter().map(|c| (if c.skipped.is_some() { &c.deadline } else { t }, candidate(c))).collect();
    let cut = work
        .iter()
        .enumerate()
        .filter(|(i, (r, d))| {
            clients[*i].skipped.is_some() && *r < &lambda && work.iter().any(|(r2, d2)| r2 < r && d2 > d)
        })
        .map(|(_, (r, _))| (*r).clone())
        .min();
    Some(cut.map_or(lambda.clone(), |c| c.min(lambda)))
}

/// [`guarded_deadline`] over job states.
pub fn server_deadline<'a>(t: &Rational, clients: impl IntoIterator<Item = ClientDeadline<'a>>) -> Option<Rational> {
    let views: Vec<ClientView<Rational>> = clients
        .into_iter()
        .map(|c| ClientView { deadline: c.deadline.clone(), skipped: c.skips(t).then(|| c.following.clone()) })
        .collect();
    guarded_deadline(t, &views)
}

/// EDF among active candidates `(id, deadline, active)`; ties go to the
/// smaller id.
pub fn edf_pick<'a, I, K>(candidates: I) -> Option<K>
where
    I: IntoIterator<Item = (K, &'a Rational, bool)>,
    K: Ord + Copy,
{
    candidates
        .into_iter()
        .filter(|(_, _, active)| *active)
        .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(k, _, _)| k)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Server {
    pub id: u32,
    pub utilization: Rational,
    pub budget: Rational,
    pub deadline: Rational,
    pub replenished_at: Rational,
    started: bool,
}

impl Server {
    pub fn new(id: u32, utilization: Rational) -> Result<Self, ServerError> {
        if !utilization.is_positive() || utilization > Rational::one() {
            return Err(ServerError::Utilization { server: id, utilization });
        }
        Ok(Server {
            id,
            utilization,
            budget: Rational::zero(),
            deadline: Rational::zero(),
            replenished_at: Rational::zero(),
            started: false,
        })
    }

    pub fn is_unit(&self) -> bool {
        self.utilization == Rational::one()
    }

    /// Start a new budget window `[t, deadline)`.
    ///
    /// Only legal at the system start or at the current deadline.
    pub fn replenish(&mut self, t: &Rational, deadline: Rational) -> Result<(), ServerError> {
        if self.started && *t != self.deadline {
            return Err(ServerError::NotADeadline { server: self.id, t: t.clone(), deadline: self.deadline.clone() });
        }
        debug_assert!(deadline > *t);
        self.budget = &self.utilization * (&deadline - t);
        self.deadline = deadline;
        self.replenished_at = t.clone();
        self.started = true;
        Ok(())
    }

    pub fn consume(&mut self, amount: &Rational) {
        self.budget -= amount;
        debug_assert!(!self.budget.is_negative(), "server {} overran its budget", self.id);
    }

    /// The server with utilization `alpha * utilization` and the same
    /// deadlines.
    pub fn scale(&self, alpha: &Rational) -> Result<Server, ServerError> {
        let max = self.utilization.recip();
        if !alpha.is_positive() || *alpha > max {
            return Err(ServerError::ScaleOutOfRange { server: self.id, alpha: alpha.clone(), max });
        }
        Ok(Server {
            id: self.id,
            utilization: alpha * &self.utilization,
            budget: alpha * &self.budget,
            deadline: self.deadline.clone(),
            replenished_at: self.replenished_at.clone(),
            started: self.started,
        })
    }
}

/// How a dedicated server picks its deadlines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeadlineRule {
    /// Skip deadlines of client jobs that already completed.
    Dynamic,
    /// Every client deadline is a server deadline.
    AllClientDeadlines,
}

/// How much processor the server gets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Supply {
    /// Runs only while it has budget.
    Budgeted(Rational),
    /// Owns the processor outright; plain uniprocessor EDF.
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub start: Rational,
    pub end: Rational,
    pub task: TaskId,
    pub job: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Miss {
    pub task: TaskId,
    pub job: u64,
    pub deadline: Rational,
    pub remaining: Rational,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DedicatedRun {
    /// `(t, budget, deadline)` at every replenishment.
    pub replenishments: Vec<(Rational, Rational, Rational)>,
    pub segments: Vec<Segment>,
    pub misses: Vec<Miss>,
    /// Budget left over when a server deadline passed.
    pub overruns: Vec<(Rational, Rational)>,
}

impl DedicatedRun {
    pub fn realized_deadlines(&self) -> Vec<Rational> {
        self.replenishments.iter().map(|(_, _, d)| d.clone()).collect()
    }

    pub fn budgets(&self) -> Vec<Rational> {
        self.replenishments.iter().map(|(_, b, _)| b.clone()).collect()
    }

    /// Jobs in the order they were first dispatched, split runs included.
    pub fn dispatch_order(&self) -> Vec<(TaskId, u64)> {
        let mut order: Vec<(TaskId, u64)> = Vec::new();
        for s in &self.segments {
            if order.last() != Some(&(s.task, s.job)) {
                order.push((s.task, s.job));
            }
        }
        order
    }

    pub fn is_feasible(&self) -> bool {
        self.misses.is_empty()
    }
}

/// Run an EDF server over `clients` on a processor of its own until `horizon`.
pub fn simulate_dedicated(
    clients: &[FixedUtilizationTask],
    supply: Supply,
    rule: DeadlineRule,
    horizon: &Rational,
) -> Result<DedicatedRun, ServerError> {
    if clients.is_empty() {
        return Err(ServerError::NoClients);
    }
    let mut jobs: Vec<Job> = clients.iter().map(|c| c.job(0)).collect();
    let mut server = match &supply {
        Supply::Budgeted(u) => Some(Server::new(0, u.clone())?),
        Supply::Full => None,
    };
    let mut run = DedicatedRun::default();
    let mut t = Rational::zero();

    let next_server_deadline = |t: &Rational, jobs: &[Job]| -> Rational {
        let following: Vec<Rational> = jobs.iter().zip(clients).map(|(j, c)| &j.deadline + &c.period).collect();
        let views = jobs.iter().zip(&following).map(|(j, f)| ClientDeadline {
            release: &j.release,
            deadline: &j.deadline,
            complete: match rule {
                DeadlineRule::Dynamic => j.is_complete(),
                DeadlineRule::AllClientDeadlines => false,
            },
            following: f,
        });
        server_deadline(t, views).expect("client deadlines are unbounded")
    };

    if let Some(s) = server.as_mut() {
        let d = next_server_deadline(&t, &jobs);
        s.replenish(&t, d)?;
        run.replenishments.push((t.clone(), s.budget.clone(), s.deadline.clone()));
    }

    while t < *horizon {
        let has_budget = server.as_ref().is_none_or(|s| s.budget.is_positive());
        let pick = if has_budget {
            edf_pick(jobs.iter().enumerate().map(|(i, j)| (i, &j.deadline, !j.is_complete())))
        } else {
            None
        };

        let mut next = horizon.clone();
        for j in &jobs {
            next = next.min(j.deadline.clone());
        }
        if let Some(s) = &server {
            next = next.min(s.deadline.clone());
        }
        if let Some(i) = pick {
            next = next.min(&t + &jobs[i].remaining);
            if let Some(s) = &server {
                next = next.min(&t + &s.budget);
            }
        }
        let dt = &next - &t;
        if let Some(i) = pick {
            jobs[i].remaining -= &dt;
            if let Some(s) = server.as_mut() {
                s.consume(&dt);
            }
            match run.segments.last_mut() {
                Some(last) if last.end == t && last.task == jobs[i].task && last.job == jobs[i].index => {
                    last.end = next.clone();
                }
                _ => run.segments.push(Segment {
                    start: t.clone(),
                    end: next.clone(),
                    task: jobs[i].task,
                    job: jobs[i].index,
                }),
            }
        }
        t = next;

        for (j, c) in jobs.iter_mut().zip(clients) {
            if j.deadline == t {
                if !j.is_complete() {
                    run.misses.push(Miss {
                        task: j.task,
                        job: j.index,
                        deadline: j.deadline.clone(),
                        remaining: j.remaining.clone(),
                    });
                }
                *j = c.job(j.index + 1);
            }
        }
        if t >= *horizon {
            break;
        }
        if let Some(s) = server.as_mut() {
            if s.deadline == t {
                if s.budget.is_positive() {
                    run.overruns.push((t.clone(), s.budget.clone()));
                }
                let d = next_server_deadline(&t, &jobs);
                s.replenish(&t, d)?;
                run.replenishments.push((t.clone(), s.budget.clone(), s.deadline.clone()));
            }
        }
    }
    Ok(run)
}
