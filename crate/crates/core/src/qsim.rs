//! Exact discrete-event evaluation of a schedule: FCFS single server,
//! infinite buffer, punctual show-ups.

use crate::error::{Error, Result};
use crate::model::{Realization, Schedule, SimOutcome, SystemInstance};

/// Right-continuous step function of the number in system.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueuePath {
    breakpoints: Vec<(f64, u32)>,
}

impl QueuePath {
    /// `(time, queue length just after time)`, strictly increasing in time.
    pub fn breakpoints(&self) -> &[(f64, u32)] {
        &self.breakpoints
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn value_at(&self, t: f64) -> u32 {
        match self.breakpoints.partition_point(|&(s, _)| s <= t) {
            0 => 0,
            i => self.breakpoints[i - 1].1,
        }
    }

    /// `int f(Q(t)) dt` over the path; the path ends at zero.
    fn integrate(&self, f: impl Fn(u32) -> f64) -> f64 {
        self.breakpoints
            .windows(2)
            .map(|w| f(w[0].1) * (w[1].0 - w[0].0))
            .sum()
    }

    /// `int (Q(t) - 1)^+ dt`, the makespan.
    pub fn excess_integral(&self) -> f64 {
        self.integrate(|q| q.saturating_sub(1) as f64)
    }

    /// Lebesgue measure of `{t : Q(t) > 0}`.
    pub fn busy_time(&self) -> f64 {
        self.integrate(|q| if q > 0 { 1.0 } else { 0.0 })
    }
}

pub(crate) struct Totals {
    pub makespan: f64,
    pub tau: f64,
    pub work: f64,
    pub shows: usize,
}

fn check_sizes(
    instance: &SystemInstance,
    schedule: &Schedule,
    realization: &Realization,
) -> Result<()> {
    if schedule.len() != instance.population {
        return Err(Error::SizeMismatch {
            expected: instance.population,
            found: schedule.len(),
        });
    }
    realization.check_population(instance.population)
}

/// Lindley recursion over the show-ups in slot order. `visit` sees
/// `(arrival, start, departure)` of each served job.
pub(crate) fn lindley(
    instance: &SystemInstance,
    schedule: &Schedule,
    realization: &Realization,
    mut visit: impl FnMut(f64, f64, f64),
) -> Result<Totals> {
    check_sizes(instance, schedule, realization)?;
    let n = instance.n as f64;
    let services = realization.services();
    let mut depart = 0.0_f64;
    let mut makespan = 0.0_f64;
    let mut work = 0.0_f64;
    let mut k = 0usize;
    for (&arrival, &show) in schedule.times().iter().zip(realization.shows()) {
        if !show {
            continue;
        }
        let s = services[k] / n;
        let start = depart.max(arrival);
        makespan += start - arrival;
        depart = start + s;
        work += s;
        visit(arrival, start, depart);
        k += 1;
    }
    Ok(Totals {
        makespan,
        tau: if k == 0 { 0.0 } else { depart },
        work,
        shows: k,
    })
}

/// `c_{w,n} W + c_{o,n} O` for one realization, without per-job bookkeeping.
pub(crate) fn realized_cost(
    instance: &SystemInstance,
    schedule: &Schedule,
    realization: &Realization,
) -> Result<f64> {
    let t = lindley(instance, schedule, realization, |_, _, _| {})?;
    let overage = (t.tau - instance.params.horizon).max(0.0);
    Ok(instance.cw_n * t.makespan + instance.co_n * overage)
}

/// Evaluates `schedule` on `realization` in the `n`-th system.
///
/// Ties at one appointment epoch are served in slot order. When nobody
/// shows, every output is zero.
pub fn simulate(
    instance: &SystemInstance,
    schedule: &Schedule,
    realization: &Realization,
) -> Result<SimOutcome> {
    let mut waits = Vec::with_capacity(realization.shows_count());
    let t = lindley(instance, schedule, realization, |a, s, _| waits.push(s - a))?;
    Ok(SimOutcome {
        makespan_w: t.makespan,
        overage_o: (t.tau - instance.params.horizon).max(0.0),
        tau: t.tau,
        idle: if t.shows == 0 { 0.0 } else { t.tau - t.work },
        shows_count: t.shows,
        per_job_waits: waits,
    })
}

/// Reconstructs the number-in-system path `Q_n`.
pub fn queue_path(
    instance: &SystemInstance,
    schedule: &Schedule,
    realization: &Realization,
) -> Result<QueuePath> {
    let mut arrivals = Vec::new();
    let mut departures = Vec::new();
    lindley(instance, schedule, realization, |a, _, d| {
        arrivals.push(a);
        departures.push(d);
    })?;

    // Both sequences are sorted; merge them, netting events at equal times.
    let mut breakpoints: Vec<(f64, u32)> = Vec::with_capacity(arrivals.len() + departures.len());
    let (mut i, mut j) = (0, 0);
    let mut q: i64 = 0;
    while i < arrivals.len() || j < departures.len() {
        let t = match (arrivals.get(i), departures.get(j)) {
            (Some(&a), Some(&d)) => a.min(d),
            (Some(&a), None) => a,
            (None, Some(&d)) => d,
            (None, None) => unreachable!(),
        };
        while i < arrivals.len() && arrivals[i] == t {
            q += 1;
            i += 1;
        }
        while j < departures.len() && departures[j] == t {
            q -= 1;
            j += 1;
        }
        debug_assert!(q >= 0);
        match breakpoints.last_mut() {
            Some(last) if last.0 == t => last.1 = q as u32,
            _ => breakpoints.push((t, q as u32)),
        }
    }
    Ok(QueuePath { breakpoints })
}
