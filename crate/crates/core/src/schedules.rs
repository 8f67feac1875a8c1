//! Candidate schedules for the `n`-th system.
//!
//! The fluid schedule books jobs at the effective service rate `n mu / p`
//! until `H` and batches the remainder at `H`. Linear-drift schedules shift
//! that rate by `sqrt(n) * beta`; the diffusion schedule uses the optimal
//! drift. The explicit `T_i` formulas are implemented; the corresponding
//! counting functions (`1 + floor(n mu t / p)` and
//! `floor(n t (mu + beta / sqrt n) / p)`) differ from them by at most one
//! slot, which does not matter asymptotically.

use crate::analytics::diffusion_constants;
use crate::error::{Error, Result};
use crate::model::{ModelParams, Schedule, SystemInstance};

/// Piecewise-linear, non-decreasing cumulative control on `[0, H)` with a
/// terminal mass at `H`.
///
/// Knots are `(time, value)` pairs, linearly interpolated. A repeated time
/// encodes a jump; the function is right-continuous, so the last knot at a
/// given time wins. The first knot sits at `0`, the last at `H` and carries
/// the left limit `control(H-)`; `control(t) = total` for `t >= H`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeControl {
    knots: Vec<(f64, f64)>,
    horizon: f64,
    total: f64,
}

impl CumulativeControl {
    pub fn new(knots: Vec<(f64, f64)>, horizon: f64, total: f64) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::domain("a control needs knots at 0 and H"));
        }
        if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != horizon {
            return Err(Error::domain("control knots must start at 0 and end at H"));
        }
        if knots.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite()) || !total.is_finite() {
            return Err(Error::domain("control knots must be finite"));
        }
        if knots[0].1 < 0.0 {
            return Err(Error::domain("control must be non-negative"));
        }
        if knots.windows(2).any(|w| w[1].0 < w[0].0 || w[1].1 < w[0].1) {
            return Err(Error::domain("control must be non-decreasing"));
        }
        if total < knots[knots.len() - 1].1 {
            return Err(Error::domain("terminal mass must be non-negative"));
        }
        Ok(CumulativeControl {
            knots,
            horizon,
            total,
        })
    }

    /// The fluid-optimal control `lambda*(t) = mu t / p` on `[0, H)`, `alpha` from `H` on.
    pub fn fluid_optimal(params: &ModelParams) -> Result<Self> {
        params.require_overloaded()?;
        let h = params.horizon;
        Self::new(
            vec![(0.0, 0.0), (h, params.mu * h / params.p)],
            h,
            params.alpha,
        )
    }

    /// Counting function `E(t) = #{i : T_i <= t}` of a schedule.
    pub fn counting(schedule: &Schedule, horizon: f64) -> Self {
        let times = schedule.times();
        let mut knots = vec![(0.0, 0.0)];
        let mut count = 0.0;
        let mut i = 0;
        while i < times.len() && times[i] < horizon {
            let t = times[i];
            let mut j = i;
            while j < times.len() && times[j] == t {
                j += 1;
            }
            if t > 0.0 {
                knots.push((t, count));
            }
            count += (j - i) as f64;
            knots.push((t, count));
            i = j;
        }
        knots.push((horizon, count));
        CumulativeControl {
            knots,
            horizon,
            total: times.len() as f64,
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// `control(H-)`.
    pub fn before_horizon(&self) -> f64 {
        self.knots[self.knots.len() - 1].1
    }

    pub fn terminal_mass(&self) -> f64 {
        self.total - self.before_horizon()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CumulativeControl {
            knots: self.knots.iter().map(|&(t, v)| (t, v * factor)).collect(),
            horizon: self.horizon,
            total: self.total * factor,
        }
    }

    /// Right-continuous evaluation.
    pub fn value(&self, t: f64) -> f64 {
        if t >= self.horizon {
            return self.total;
        }
        if t < 0.0 {
            return 0.0;
        }
        let i = self.knots.partition_point(|&(s, _)| s <= t) - 1;
        let (t0, v0) = self.knots[i];
        let (t1, v1) = self.knots[i + 1];
        if t1 > t0 {
            v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        } else {
            v0
        }
    }

    /// Consecutive knot pairs; a pair with equal times is a jump.
    pub(crate) fn segments(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        self.knots.windows(2).map(|w| (w[0], w[1]))
    }

    /// `inf {t : control(t) > level}`, or `H` if the level is only passed at `H`.
    fn first_exceeding(&self, level: f64) -> f64 {
        if self.knots[0].1 > level {
            return 0.0;
        }
        for ((t0, v0), (t1, v1)) in self.segments() {
            if v1 > level {
                if t1 == t0 {
                    return t1;
                }
                return (t0 + (level - v0) / (v1 - v0) * (t1 - t0)).clamp(t0, t1);
            }
        }
        self.horizon
    }
}

/// `T_i = min{p (i-1) / (n mu), H}`.
pub fn fluid_schedule(instance: &SystemInstance) -> Schedule {
    let params = &instance.params;
    if !params.overloaded() {
        log::warn!("fluid schedule requested for a system that is not overloaded");
    }
    let rate = instance.n as f64 * params.mu;
    evenly_spaced(instance.population, params.p, rate, params.horizon)
}

fn evenly_spaced(count: usize, p: f64, rate: f64, horizon: f64) -> Schedule {
    let times = (0..count)
        .map(|i| (p * i as f64 / rate).min(horizon))
        .collect();
    Schedule::from_sorted(times)
}

/// What to do when a drifted rate books every slot before `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Overflow {
    #[default]
    Reject,
    /// Keep the first `N_n` slots of the drifted grid.
    Clamp,
}

/// `T_i = min{p (i-1) / (n mu + sqrt(n) beta), H}`.
pub fn linear_drift_schedule(
    instance: &SystemInstance,
    beta: f64,
    overflow: Overflow,
) -> Result<Schedule> {
    let params = &instance.params;
    let nf = instance.n as f64;
    let rate = nf * params.mu + nf.sqrt() * beta;
    if !(rate > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!(
            "drift {} is too negative for n = {} (need n > (beta/mu)^2)",
            beta, instance.n
        )));
    }
    // Slots with p (i-1) / rate < H, counted over all i >= 1.
    let pre_horizon = (params.horizon * rate / params.p).ceil();
    if pre_horizon > instance.population as f64 && overflow == Overflow::Reject {
        return Err(Error::domain(format!(
            "drifted schedule books {} slots before H but the population is {}",
            pre_horizon, instance.population
        )));
    }
    Ok(evenly_spaced(
        instance.population,
        params.p,
        rate,
        params.horizon,
    ))
}

/// Which drift coefficient the diffusion schedule uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftRule {
    /// `beta* = -sigma sqrt(cw / (2 c~o))`.
    #[default]
    Optimal,
    /// `-c*_H` from the closed-form summary constant.
    Legacy,
}

pub fn diffusion_drift(params: &ModelParams, rule: DriftRule) -> Result<f64> {
    let dc = diffusion_constants(params)?;
    Ok(match rule {
        DriftRule::Optimal => dc.beta_star,
        DriftRule::Legacy => -dc.c_star_legacy,
    })
}

/// Linear-drift schedule at the diffusion drift.
pub fn diffusion_schedule(instance: &SystemInstance, rule: DriftRule) -> Result<Schedule> {
    let beta = diffusion_drift(&instance.params, rule)?;
    linear_drift_schedule(instance, beta, Overflow::Reject)
}

/// `T_i = H (i-1) / (N-1)`; a single job sits at 0.
pub fn uniform_schedule(instance: &SystemInstance) -> Schedule {
    let count = instance.population;
    let h = instance.params.horizon;
    if count == 1 {
        return Schedule::from_sorted(vec![0.0]);
    }
    let times = (0..count)
        .map(|i| (h * i as f64 / (count - 1) as f64).min(h))
        .collect();
    Schedule::from_sorted(times)
}

/// Generalized inverse of a cumulative control: slot `i` opens where the
/// control first exceeds `i - 1`, i.e. at the start of the `i`-th unit of
/// mass. For integer-valued step controls this is `inf{t : control(t) >= i}`.
pub fn from_cumulative(instance: &SystemInstance, control: &CumulativeControl) -> Result<Schedule> {
    let n = instance.population as f64;
    if (control.total() - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::MassMismatch {
            expected: n,
            found: control.total(),
        });
    }
    let times: Vec<f64> = (0..instance.population)
        .map(|i| control.first_exceeding(i as f64))
        .collect();
    Schedule::new(times, instance.params.horizon)
}
