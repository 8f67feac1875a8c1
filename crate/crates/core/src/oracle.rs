//! Complete-information solution: with show flags and service times known in
//! advance, every show-up arrives exactly when the server frees up and the
//! excess is batched at `H`. This is pathwise optimal for both the makespan
//! and the completion time, hence for any weighted sum of the two.

use crate::error::Result;
use crate::model::{Realization, Schedule, SystemInstance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiOutcome {
    pub makespan_w_star: f64,
    pub overage_o_star: f64,
    /// Total scaled work of the show-ups.
    pub tau_star: f64,
}

impl CiOutcome {
    pub fn cost(&self, instance: &SystemInstance) -> f64 {
        instance.cw_n * self.makespan_w_star + instance.co_n * self.overage_o_star
    }
}

/// Scaled departure epochs `t_1, ..., t_K` of the show-ups when the server
/// never idles; `t_m = t_{m-1} + nu_m / n`.
fn departures(instance: &SystemInstance, realization: &Realization) -> Vec<f64> {
    let n = instance.n as f64;
    let k = realization.shows_count();
    let mut t = 0.0_f64;
    realization.services()[..k]
        .iter()
        .map(|&v| {
            t += v / n;
            t
        })
        .collect()
}

/// CI makespan, overage and completion time for one realization.
///
/// The makespan is the exact integral of `K - S(s) - 1` over `[H, tau*]`,
/// summed over the constant pieces between departures.
pub fn ci_outcome(instance: &SystemInstance, realization: &Realization) -> Result<CiOutcome> {
    realization.check_population(instance.population)?;
    let h = instance.params.horizon;
    let deps = departures(instance, realization);
    let k = deps.len();
    let tau_star = deps.last().copied().unwrap_or(0.0);
    let mut makespan = 0.0;
    if tau_star > h {
        let mut left = 0.0_f64;
        for (m, &right) in deps.iter().enumerate() {
            // On [t_m, t_{m+1}) exactly m jobs are done.
            let lo = left.max(h);
            if right > lo {
                makespan += (k - m - 1) as f64 * (right - lo);
            }
            left = right;
        }
    }
    Ok(CiOutcome {
        makespan_w_star: makespan,
        overage_o_star: (tau_star - h).max(0.0),
        tau_star,
    })
}

/// The CI schedule itself. The `k`-th show-up is booked at `min(t_{k-1}, H)`;
/// a no-show slot shares the time of the next show-up slot, or `H` if none
/// follows.
pub fn ci_schedule(instance: &SystemInstance, realization: &Realization) -> Result<Schedule> {
    realization.check_population(instance.population)?;
    let h = instance.params.horizon;
    let deps = departures(instance, realization);
    let shows = realization.shows();

    let mut times = vec![h; shows.len()];
    let mut k = 0;
    for (slot, &show) in shows.iter().enumerate() {
        if show {
            times[slot] = if k == 0 { 0.0 } else { deps[k - 1].min(h) };
            k += 1;
        }
    }
    // Back-fill no-shows from the right.
    let mut next = h;
    for (slot, &show) in shows.iter().enumerate().rev() {
        if show {
            next = times[slot];
        } else {
            times[slot] = next;
        }
    }
    Ok(Schedule::from_sorted(times))
}
