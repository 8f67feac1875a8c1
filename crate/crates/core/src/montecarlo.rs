//! Reproducible, replication-parallel estimators.
//!
//! Replication `k` (1-based) draws everything from `RngPolicy::substream(k)`.
//! Results land in an index-ordered buffer and are reduced sequentially, so
//! an estimate depends only on `(seed, reps, inputs)` and never on the number
//! of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytics::fluid_summary;
use crate::error::{Error, Result};
use crate::model::{ModelParams, Realization, Schedule, SystemInstance};
use crate::oracle::ci_outcome;
use crate::qsim::realized_cost;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(reps)`.
    pub stderr: f64,
    pub reps: usize,
}

impl Estimate {
    /// Mean and standard error with compensated summation in index order.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let reps = samples.len();
        if reps < 2 {
            return Err(Error::domain(format!(
                "need at least 2 replications, got {}",
                reps
            )));
        }
        let first = samples[0];
        if samples.iter().all(|&x| x == first) {
            return Ok(Estimate {
                mean: first,
                stderr: 0.0,
                reps,
            });
        }
        let mean = neumaier_sum(samples.iter().copied()) / reps as f64;
        let ss = neumaier_sum(samples.iter().map(|&x| (x - mean) * (x - mean)));
        Ok(Estimate {
            mean,
            stderr: (ss / (reps - 1) as f64).sqrt() / (reps as f64).sqrt(),
            reps,
        })
    }

    /// `(mean - shift) * scale`, `stderr * |scale|`.
    pub fn affine(&self, shift: f64, scale: f64) -> Self {
        Estimate {
            mean: (self.mean - shift) * scale,
            stderr: self.stderr * scale.abs(),
            reps: self.reps,
        }
    }
}

/// Kahan-Babuska-Neumaier summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngPolicy {
    pub seed: u64,
}

impl RngPolicy {
    pub fn new(seed: u64) -> Self {
        RngPolicy { seed }
    }

    /// ChaCha8 keyed by `seed`, stream `k`. Distinct streams of the same key
    /// never overlap.
    pub fn substream(&self, k: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k);
        rng
    }

    /// Runs `f(k, substream(k))` for `k = 1..=reps` in parallel and returns
    /// the results in index order.
    pub fn replicate<T, F>(&self, reps: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64, &mut ChaCha8Rng) -> Result<T> + Sync,
    {
        (1..=reps as u64)
            .into_par_iter()
            .map(|k| f(k, &mut self.substream(k)))
            .collect()
    }
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < 2 {
        return Err(Error::domain(format!(
            "need at least 2 replications, got {}",
            reps
        )));
    }
    Ok(())
}

/// Per-replication costs `c_{w,n} W + c_{o,n} O` of `schedule`.
pub fn cost_samples(
    instance: &SystemInstance,
    schedule: &Schedule,
    reps: usize,
    rng: &RngPolicy,
) -> Result<Vec<f64>> {
    check_reps(reps)?;
    rng.replicate(reps, |_, r| {
        let realization = instance.sample_realization(r);
        realized_cost(instance, schedule, &realization)
    })
}

/// Estimates `J_n = c_{w,n} E W_n + c_{o,n} E O_n`.
pub fn estimate_cost(
    instance: &SystemInstance,
    schedule: &Schedule,
    reps: usize,
    rng: &RngPolicy,
) -> Result<Estimate> {
    Estimate::from_samples(&cost_samples(instance, schedule, reps, rng)?)
}

/// Estimates the complete-information cost.
pub fn estimate_ci_cost(
    instance: &SystemInstance,
    reps: usize,
    rng: &RngPolicy,
) -> Result<Estimate> {
    check_reps(reps)?;
    let samples = rng.replicate(reps, |_, r| {
        let realization = instance.sample_realization(r);
        Ok(ci_outcome(instance, &realization)?.cost(instance))
    })?;
    Estimate::from_samples(&samples)
}

fn gap(instance: &SystemInstance, schedule: &Schedule, realization: &Realization) -> Result<f64> {
    let cost = realized_cost(instance, schedule, realization)?;
    Ok(cost - ci_outcome(instance, realization)?.cost(instance))
}

/// Paired differences `cost(schedule, r_k) - ci_cost(r_k)` on common realizations.
pub fn paired_differences(
    instance: &SystemInstance,
    schedule: &Schedule,
    reps: usize,
    rng: &RngPolicy,
) -> Result<Vec<f64>> {
    check_reps(reps)?;
    rng.replicate(reps, |_, r| {
        gap(instance, schedule, &instance.sample_realization(r))
    })
}

/// Estimates the stochasticity gap of `schedule` with common random numbers.
pub fn estimate_sg(
    instance: &SystemInstance,
    schedule: &Schedule,
    reps: usize,
    rng: &RngPolicy,
) -> Result<Estimate> {
    Estimate::from_samples(&paired_differences(instance, schedule, reps, rng)?)
}

/// `sqrt(n) (J_n - V_bar)`.
pub fn scaled_diffusion_cost(cost: &Estimate, params: &ModelParams, n: u64) -> Result<Estimate> {
    let v_bar = fluid_summary(params)?.v_bar;
    Ok(cost.affine(v_bar, (n as f64).sqrt()))
}
