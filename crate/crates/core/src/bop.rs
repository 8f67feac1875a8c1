//! Brownian control problem on a uniform grid: the discrete Skorohod map,
//! Brownian path sampling and Monte-Carlo costs of piecewise-linear controls.
//!
//! Reflection is applied at grid points only, which biases the reflected
//! process downward by `O(sqrt(dt))`. The bias is left in place.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analytics::BopCoefficients;
use crate::error::{Error, Result};
use crate::montecarlo::{Estimate, RngPolicy};

/// Values on the grid `0, dt, 2 dt, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub dt: f64,
    pub values: Vec<f64>,
}

/// Number of grid steps covering `[0, horizon]`, robust to `horizon / dt`
/// landing just below an integer.
pub fn grid_steps(horizon: f64, dt: f64) -> usize {
    (horizon / dt + 1e-9).floor() as usize
}

impl GridPath {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::domain("grid step must be positive"));
        }
        if values.is_empty() {
            return Err(Error::domain("a grid path needs at least one value"));
        }
        Ok(GridPath { dt, values })
    }

    pub fn from_fn(horizon: f64, dt: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let m = grid_steps(horizon, dt);
        Self::new(dt, (0..=m).map(|k| f(k as f64 * dt)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Trapezoid rule over the whole grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.dt)
    }
}

fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => dt * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Incremental Skorohod map: feed `x` point by point, read `(Gamma_1, Gamma_2)`.
#[derive(Debug, Clone, Copy, Default)]
struct Reflector {
    push: f64,
}

impl Reflector {
    fn step(&mut self, x: f64) -> (f64, f64) {
        if -x > self.push {
            self.push = -x;
        }
        (x + self.push, self.push)
    }
}

/// `Gamma_2(x)(t) = sup_{s <= t} (-x(s))^+` and `Gamma_1(x) = x + Gamma_2(x)`,
/// in one left-to-right pass.
pub fn skorohod_map(path: &GridPath) -> (GridPath, GridPath) {
    let mut r = Reflector::default();
    let (q, l): (Vec<f64>, Vec<f64>) = path.values.iter().map(|&x| r.step(x)).unzip();
    (
        GridPath {
            dt: path.dt,
            values: q,
        },
        GridPath {
            dt: path.dt,
            values: l,
        },
    )
}

/// Brownian motion with zero drift and diffusion coefficient `sigma` on the
/// grid over `[0, horizon]`.
pub fn sample_bm<R: Rng + ?Sized>(
    sigma: f64,
    horizon: f64,
    dt: f64,
    rng: &mut R,
) -> Result<GridPath> {
    if !(sigma >= 0.0) {
        return Err(Error::domain("sigma must be non-negative"));
    }
    let m = grid_steps(horizon, dt);
    let scale = sigma * dt.sqrt();
    let mut x = 0.0;
    let mut values = Vec::with_capacity(m + 1);
    values.push(0.0);
    for _ in 0..m {
        let z: f64 = StandardNormal.sample(rng);
        x += scale * z;
        values.push(x);
    }
    GridPath::new(dt, values)
}

/// Right-continuous piecewise-linear control on `[0, H]` with an optional
/// non-negative jump at `H`. Repeated knot times encode jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearControl {
    knots: Vec<(f64, f64)>,
    terminal_jump: f64,
}

impl PiecewiseLinearControl {
    pub fn new(knots: Vec<(f64, f64)>, terminal_jump: f64) -> Result<Self> {
        if knots.len() < 2 || knots[0].0 != 0.0 {
            return Err(Error::domain("a control needs knots from 0 to H"));
        }
        if knots.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite())
            || !terminal_jump.is_finite()
        {
            return Err(Error::domain("control knots must be finite"));
        }
        if knots.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err(Error::domain("knot times must be non-decreasing"));
        }
        if !(knots[knots.len() - 1].0 > 0.0) {
            return Err(Error::domain("control horizon must be positive"));
        }
        if terminal_jump < 0.0 {
            return Err(Error::domain("terminal jump must be non-negative"));
        }
        Ok(PiecewiseLinearControl {
            knots,
            terminal_jump,
        })
    }

    /// `U(t) = beta t` on `[0, horizon]`.
    pub fn linear(beta: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![(0.0, 0.0), (horizon, beta * horizon)], 0.0)
    }

    pub fn horizon(&self) -> f64 {
        self.knots[self.knots.len() - 1].0
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn terminal_jump(&self) -> f64 {
        self.terminal_jump
    }

    /// Right-continuous value on `[0, H)`; at `H` the terminal jump is included.
    pub fn value(&self, t: f64) -> f64 {
        let h = self.horizon();
        if t >= h {
            return self.knots[self.knots.len() - 1].1 + self.terminal_jump;
        }
        let i = self.knots.partition_point(|&(s, _)| s <= t).max(1) - 1;
        let (t0, v0) = self.knots[i];
        let (t1, v1) = self.knots[i + 1];
        if t1 > t0 {
            v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        } else {
            v0
        }
    }

    /// Samples `U` on the grid. A jump inside `(t_k, t_{k+1})` is moved to
    /// `t_k`; the terminal jump lands on the last grid point.
    pub fn on_grid(&self, dt: f64) -> Result<GridPath> {
        let h = self.horizon();
        let m = grid_steps(h, dt);
        let mut values: Vec<f64> = (0..=m)
            .map(|k| self.value((k as f64 * dt).min(h)))
            .collect();
        let jumps = self
            .knots
            .windows(2)
            .filter(|w| w[0].0 == w[1].0 && w[0].0 > 0.0);
        for w in jumps {
            let (s, size) = (w[0].0, w[1].1 - w[0].1);
            let k = (s / dt).floor() as usize;
            if k < m && (k as f64) * dt < s {
                // Not on a grid point: apply at the cell's left endpoint.
                values[k] += size;
            }
        }
        if m > 0 && (m as f64) * dt < h {
            values[m] = self.value(h);
        }
        GridPath::new(dt, values)
    }
}

fn check_grid(horizon: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0) || !(horizon > 0.0) {
        return Err(Error::domain("grid step and horizon must be positive"));
    }
    if dt >= horizon {
        return Err(Error::domain(format!(
            "grid step {} must be below the horizon {}",
            dt, horizon
        )));
    }
    Ok(())
}

/// One replication of `(cw / H) int Q dt + (c~o / H) L(H)`, with `Q, L` the
/// grid Skorohod map of `U + X`, streamed without storing the path.
fn bop_cost_path<R: Rng + ?Sized>(
    u: &[f64],
    coeffs: &BopCoefficients,
    horizon: f64,
    dt: f64,
    rng: &mut R,
) -> f64 {
    let scale = coeffs.sigma * dt.sqrt();
    let mut r = Reflector::default();
    let mut x = 0.0;
    let (q0, _) = r.step(u[0]);
    let mut inner = 0.0;
    let mut last = q0;
    let m = u.len() - 1;
    for (k, &uk) in u.iter().enumerate().skip(1) {
        let z: f64 = StandardNormal.sample(rng);
        x += scale * z;
        let (q, _) = r.step(uk + x);
        if k < m {
            inner += q;
        } else {
            last = q;
        }
    }
    let area = dt * (0.5 * (q0 + last) + inner);
    (coeffs.cw * area + coeffs.tilde_co * r.push) / horizon
}

/// Monte-Carlo estimate of the horizon-normalized Brownian cost of `control`.
///
/// Replication `k` draws its Brownian path from `rng.substream(k)`.
pub fn bop_cost_mc(
    control: &PiecewiseLinearControl,
    coeffs: &BopCoefficients,
    dt: f64,
    reps: usize,
    rng: &RngPolicy,
) -> Result<Estimate> {
    let horizon = control.horizon();
    check_grid(horizon, dt)?;
    if reps < 2 {
        return Err(Error::domain(format!(
            "need at least 2 replications, got {}",
            reps
        )));
    }
    let u = control.on_grid(dt)?;
    let samples = rng.replicate(reps, |_, r| {
        Ok(bop_cost_path(&u.values, coeffs, horizon, dt, r))
    })?;
    Estimate::from_samples(&samples)
}

/// Time average of the grid-reflected `beta t + X` over `[0, horizon]`, one
/// sample per path.
pub fn rbm_time_average(
    beta: f64,
    sigma: f64,
    horizon: f64,
    dt: f64,
    paths: usize,
    rng: &RngPolicy,
) -> Result<Estimate> {
    check_grid(horizon, dt)?;
    let m = grid_steps(horizon, dt);
    let scale = sigma * dt.sqrt();
    let samples = rng.replicate(paths, |_, r| {
        let mut refl = Reflector::default();
        let mut x = 0.0;
        let mut inner = 0.0;
        let mut last = 0.0;
        for k in 1..=m {
            let z: f64 = StandardNormal.sample(r);
            x += scale * z;
            let (q, _) = refl.step(beta * k as f64 * dt + x);
            if k < m {
                inner += q;
            } else {
                last = q;
            }
        }
        Ok((0.5 * last + inner) / m as f64)
    })?;
    Estimate::from_samples(&samples)
}
