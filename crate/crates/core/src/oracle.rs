//! Exhaustive feasibility check for tiny periodic systems.
//!
//! Time is cut into slots of one quantum. Over one hyperperiod, every slot
//! runs up to `m` distinct jobs with work left; the search tries every such
//! choice depth-first and remembers states that already failed. Running as
//! many jobs as possible in every slot loses no generality, so only those
//! choices are explored.

use std::collections::HashSet;

use thiserror::Error;

use crate::model::TaskSystem;
use crate::time::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_tasks: usize,
    pub max_processors: u32,
    pub max_slots: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_tasks: 5, max_processors: 2, max_slots: 60 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("{0} is not a multiple of the quantum")]
    NotQuantized(Rational),
    #[error("quantum must be positive")]
    Quantum,
    #[error("only synchronous systems (all starts zero) are supported")]
    Offset,
}

struct Search {
    m: usize,
    period: Vec<u32>,
    wcet: Vec<u32>,
    horizon: u32,
    failed: HashSet<(u32, Vec<u32>)>,
}

impl Search {
    fn slots_left(&self, i: usize, slot: u32) -> u32 {
        self.period[i] - slot % self.period[i]
    }

    /// Every job can still make it, also when competing for `m` processors.
    fn hopeful(&self, slot: u32, remaining: &[u32]) -> bool {
        let mut due: Vec<(u32, u32)> = (0..remaining.len()).map(|i| (self.slots_left(i, slot), remaining[i])).collect();
        due.sort_unstable();
        let mut demand = 0u64;
        for (left, work) in due {
            if work > left {
                return false;
            }
            demand += work as u64;
            if demand > self.m as u64 * left as u64 {
                return false;
            }
        }
        true
    }

    fn feasible(&mut self, slot: u32, mut remaining: Vec<u32>) -> bool {
        if slot > 0 {
            for (i, rem) in remaining.iter_mut().enumerate() {
                if slot.is_multiple_of(self.period[i]) {
                    if *rem > 0 {
                        return false;
                    }
                    *rem = self.wcet[i];
                }
            }
        }
        if slot == self.horizon {
            return true;
        }
        if !self.hopeful(slot, &remaining) {
            return false;
        }
        let key = (slot, remaining);
        if self.failed.contains(&key) {
            return false;
        }
        let remaining = key.1.clone();

        let mut active: Vec<usize> = (0..remaining.len()).filter(|&i| remaining[i] > 0).collect();
        // least laxity first tends to find a witness quickly
        active.sort_by_key(|&i| (self.slots_left(i, slot) - remaining[i], i));
        let k = self.m.min(active.len());
        let mut pick: Vec<usize> = (0..k).collect();
        loop {
            let mut next = remaining.clone();
            for &p in &pick {
                next[active[p]] -= 1;
            }
            if self.feasible(slot + 1, next) {
                return true;
            }
            // next k-combination of positions in `active`
            let mut i = k;
            loop {
                if i == 0 {
                    self.failed.insert(key);
                    return false;
                }
                i -= 1;
                if pick[i] < active.len() - k + i {
                    break;
                }
            }
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
        }
    }
}

/// True iff some quantized schedule of `system` meets every deadline.
pub fn brute_force_feasible(system: &TaskSystem, quantum: &Rational) -> Result<bool, OracleError> {
    brute_force_feasible_with(system, quantum, &OracleLimits::default())
}

pub fn brute_force_feasible_with(
    system: &TaskSystem,
    quantum: &Rational,
    limits: &OracleLimits,
) -> Result<bool, OracleError> {
    if !quantum.is_positive() {
        return Err(OracleError::Quantum);
    }
    if system.tasks.len() > limits.max_tasks || system.processors > limits.max_processors {
        return Err(OracleError::TooLarge(format!("{} tasks on {} processors", system.tasks.len(), system.processors)));
    }
    let slots = |x: &Rational| -> Result<u32, OracleError> {
        let q = x / quantum;
        if !q.is_integer() {
            return Err(OracleError::NotQuantized(x.clone()));
        }
        q.to_i64().and_then(|v| u32::try_from(v).ok()).ok_or_else(|| OracleError::TooLarge(format!("{x} slots")))
    };
    let mut period = Vec::new();
    let mut wcet = Vec::new();
    for t in &system.tasks {
        if !t.start.is_zero() {
            return Err(OracleError::Offset);
        }
        period.push(slots(&t.period)?);
        wcet.push(slots(&(&t.utilization * &t.period))?);
    }
    let mut horizon = 1u64;
    for &p in &period {
        horizon = num_integer::lcm(horizon, p as u64);
        if horizon > limits.max_slots {
            return Err(OracleError::TooLarge(format!("hyperperiod exceeds {} slots", limits.max_slots)));
        }
    }
    let mut search = Search {
        m: system.processors as usize,
        period,
        wcet: wcet.clone(),
        horizon: horizon as u32,
        failed: HashSet::new(),
    };
    Ok(search.feasible(0, wcet))
}
