//! Random periodic task sets with a fixed total utilization.
//!
//! Utilizations are drawn uniformly from the simplex slice
//! `{u : sum u = m, 0 <= u_i <= 1}` with Stafford's RandFixedSum method,
//! periods uniformly from an integer range. Each utilization is then turned
//! into an integer execution time, the total is nudged back to at most `m`,
//! and the set is padded to exactly `m`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, PaddingConfig, TaskSystem};
use crate::taskfile::{TaskSetFile, TaskSpec};
use crate::time::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodRange {
    pub min: u32,
    pub max: u32,
}

impl Default for PeriodRange {
    fn default() -> Self {
        PeriodRange { min: 5, max: 100 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("need at least as many tasks as processors (n = {n}, m = {m})")]
    TooFewTasks { n: usize, m: u32 },
    #[error("invalid period range [{min}, {max}]")]
    PeriodRange { min: u32, max: u32 },
    #[error("could not fit {n} integer tasks under utilization {m}")]
    Rounding { n: usize, m: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One uniform sample of `n` values in `[0, 1]` summing to `total`.
pub fn rand_fixed_sum<R: Rng + ?Sized>(n: usize, total: f64, rng: &mut R) -> Vec<f64> {
    assert!(n >= 1 && (0.0..=n as f64).contains(&total));
    if n == 1 {
        return vec![total];
    }
    let k = (total.floor() as usize).min(n - 1);
    let s = total.clamp(k as f64, k as f64 + 1.0);
    let s1: Vec<f64> = (0..n).map(|i| s - (k as f64 - i as f64)).collect();
    let s2: Vec<f64> = (0..n).map(|i| (k + n - i) as f64 - s).collect();

    let tiny = f64::from_bits(1);
    let mut w = vec![vec![0.0f64; n + 1]; n];
    w[0][1] = f64::MAX;
    let mut t = vec![vec![0.0f64; n]; n - 1];
    for i in 2..=n {
        let f = i as f64;
        for c in 0..i {
            let a = w[i - 2][c + 1] * s1[c] / f;
            let b = w[i - 2][c] * s2[n - i + c] / f;
            w[i - 1][c + 1] = a + b;
            let total = w[i - 1][c + 1] + tiny;
            t[i - 2][c] = if s2[n - i + c] > s1[c] { b / total } else { 1.0 - a / total };
        }
    }

    let mut x = vec![0.0f64; n];
    let mut s = s;
    let mut j = k;
    let mut sm = 0.0;
    let mut pr = 1.0;
    for i in (1..n).rev() {
        let e = if rng.random::<f64>() <= t[i - 1][j] { 1.0 } else { 0.0 };
        let sx = rng.random::<f64>().powf(1.0 / i as f64);
        sm += (1.0 - sx) * pr * s / (i + 1) as f64;
        pr *= sx;
        x[n - i - 1] = sm + pr * e;
        s -= e;
        if e > 0.0 {
            j -= 1;
        }
    }
    x[n - 1] = sm + pr * s;
    x.shuffle(rng);
    x.iter().map(|v| v.clamp(0.0, 1.0)).collect()
}

/// Deterministic per-set seed.
pub fn set_seed(seed: u64, n: usize, index: usize) -> u64 {
    let mut z =
        seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` periodic tasks with integer parameters and total utilization at most `m`.
pub fn generate_taskfile(n: usize, m: u32, periods: PeriodRange, seed: u64) -> Result<TaskSetFile, GeneratorError> {
    if n < m as usize || m == 0 {
        return Err(GeneratorError::TooFewTasks { n, m });
    }
    if periods.min == 0 || periods.min > periods.max {
        return Err(GeneratorError::PeriodRange { min: periods.min, max: periods.max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = rand_fixed_sum(n, m as f64, &mut rng);
    let period: Vec<i64> = (0..n).map(|_| rng.random_range(periods.min..=periods.max) as i64).collect();
    let mut wcet: Vec<i64> = (0..n).map(|i| ((u[i] * period[i] as f64).round() as i64).clamp(1, period[i])).collect();

    let total = |wcet: &[i64]| -> Rational { (0..n).map(|i| Rational::new(wcet[i], period[i])).sum() };
    let m_r = Rational::from(m);
    let mut sum = total(&wcet);
    // trim the tasks rounded up the most until the set fits
    while sum > m_r {
        let i = (0..n)
            .filter(|&i| wcet[i] > 1)
            .max_by(|&a, &b| {
                let ea = wcet[a] as f64 - u[a] * period[a] as f64;
                let eb = wcet[b] as f64 - u[b] * period[b] as f64;
                ea.total_cmp(&eb).then(b.cmp(&a))
            })
            .ok_or(GeneratorError::Rounding { n, m })?;
        wcet[i] -= 1;
        sum -= Rational::new(1, period[i]);
    }
    // give back units to the tasks rounded down the most while they fit
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let da = u[a] * period[a] as f64 - wcet[a] as f64;
        let db = u[b] * period[b] as f64 - wcet[b] as f64;
        db.total_cmp(&da).then(a.cmp(&b))
    });
    for i in order {
        let step = Rational::new(1, period[i]);
        if wcet[i] < period[i] && &sum + &step <= m_r && (u[i] * period[i] as f64) > wcet[i] as f64 {
            wcet[i] += 1;
            sum += step;
        }
    }
    let tasks = (0..n).map(|i| TaskSpec { id: i as u32 + 1, period: period[i], wcet: wcet[i] }).collect();
    Ok(TaskSetFile { processors: m, tasks })
}

/// A generated set padded to full utilization.
pub fn generate_taskset(
    n: usize,
    m: u32,
    periods: PeriodRange,
    seed: u64,
    padding: &PaddingConfig,
) -> Result<TaskSystem, GeneratorError> {
    let file = generate_taskfile(n, m, periods, seed)?;
    file.to_system(padding).map_err(|e| match e {
        crate::taskfile::TaskFileError::Model(m) => GeneratorError::Model(m),
        other => unreachable!("generated files are well formed: {other}"),
    })
}
