//! Model primitives: parameters, the scaled `n`-th system, schedules,
//! realizations of the randomness and per-realization outcomes.

use std::fmt::Write as _;
use std::io::BufRead;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig17;

/// Service-time distribution family. Every law has mean `1/mu` and squared
/// coefficient of variation `cs2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceLaw {
    Exponential,
    Deterministic,
    Gamma,
    Lognormal,
}

/// Primitive constants of the scheduling problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Population mass: the `n`-th system books `ceil(alpha * n)` jobs.
    pub alpha: f64,
    /// Show-up probability.
    pub p: f64,
    /// Service rate.
    pub mu: f64,
    /// Scheduling horizon `H`.
    pub horizon: f64,
    /// Squared coefficient of variation of the service time.
    pub cs2: f64,
    pub service_law: ServiceLaw,
    /// Waiting cost rate.
    pub cw: f64,
    /// Overage cost rate.
    pub co: f64,
}

impl ModelParams {
    /// Checks the parameter invariants and returns the parameters unchanged.
    ///
    /// Non-overloaded sets are accepted here; only the limit analytics
    /// reject them.
    pub fn validate(self) -> Result<Self> {
        let finite = [
            self.alpha,
            self.p,
            self.mu,
            self.horizon,
            self.cs2,
            self.cw,
            self.co,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("parameters must be finite"));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::domain(format!("p = {} is not in (0, 1]", self.p)));
        }
        if self.mu <= 0.0 || self.horizon <= 0.0 || self.alpha <= 0.0 {
            return Err(Error::domain("mu, horizon and alpha must be positive"));
        }
        if self.cs2 < 0.0 || self.cw < 0.0 || self.co < 0.0 {
            return Err(Error::domain("cs2, cw and co must be non-negative"));
        }
        match self.service_law {
            ServiceLaw::Exponential if self.cs2 != 1.0 => {
                return Err(Error::domain("exponential service requires cs2 = 1"))
            }
            ServiceLaw::Deterministic if self.cs2 != 0.0 => {
                return Err(Error::domain("deterministic service requires cs2 = 0"))
            }
            ServiceLaw::Gamma | ServiceLaw::Lognormal if self.cs2 <= 0.0 => {
                return Err(Error::domain("gamma and lognormal service require cs2 > 0"))
            }
            _ => {}
        }
        if !self.overloaded() {
            log::debug!(
                "parameters are not overloaded (p*alpha = {} <= mu*H = {})",
                self.p * self.alpha,
                self.mu * self.horizon
            );
        }
        Ok(self)
    }

    /// `p * alpha > mu * H`: expected demand exceeds capacity within the horizon.
    pub fn overloaded(&self) -> bool {
        self.p * self.alpha > self.mu * self.horizon
    }

    /// Fluid completion time `p * alpha / mu`.
    pub fn tau_bar(&self) -> f64 {
        self.p * self.alpha / self.mu
    }

    pub(crate) fn require_overloaded(&self) -> Result<()> {
        if self.overloaded() {
            Ok(())
        } else {
            Err(Error::NotOverloaded {
                demand: self.p * self.alpha,
                capacity: self.mu * self.horizon,
            })
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str::<ModelParams>(s)
            .map_err(|e| Error::Config(e.to_string()))?
            .validate()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str::<ModelParams>(s)
            .map_err(|e| Error::Config(e.to_string()))?
            .validate()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat struct serializes")
    }
}

/// The `n`-th system of the large-population sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemInstance {
    pub params: ModelParams,
    pub n: u64,
    /// `N_n = ceil(alpha * n)`.
    pub population: usize,
    /// Service times are `nu / n`.
    pub service_scale: f64,
    /// `cw / n`.
    pub cw_n: f64,
    /// `co`, unscaled.
    pub co_n: f64,
}

impl SystemInstance {
    pub fn new(params: ModelParams, n: u64) -> Result<Self> {
        let params = params.validate()?;
        if n == 0 {
            return Err(Error::domain("scale index n must be at least 1"));
        }
        let population = ceil_population(params.alpha, n);
        if population == 0 {
            return Err(Error::domain("population is empty"));
        }
        let nf = n as f64;
        Ok(SystemInstance {
            population,
            service_scale: 1.0 / nf,
            cw_n: params.cw / nf,
            co_n: params.co,
            params,
            n,
        })
    }

    /// Draws one realization: `N` show-up flags, then `N` raw service times.
    ///
    /// The draw order is fixed so that a given stream always yields the same
    /// realization.
    pub fn sample_realization<R: Rng + ?Sized>(&self, rng: &mut R) -> Realization {
        let n = self.population;
        let p = self.params.p;
        let shows: Vec<bool> = if p >= 1.0 {
            vec![true; n]
        } else {
            (0..n).map(|_| rng.random_bool(p)).collect()
        };
        let services = ServiceSampler::new(&self.params).sample_n(rng, n);
        Realization { shows, services }
    }
}

/// `ceil(alpha * n)` that ignores floating noise just above an integer.
fn ceil_population(alpha: f64, n: u64) -> usize {
    let x = alpha * n as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Service-time sampler parameterized by `(mu, cs2)`.
#[derive(Debug, Clone, Copy)]
pub enum ServiceSampler {
    Exponential(Exp<f64>),
    Deterministic(f64),
    Gamma(Gamma<f64>),
    Lognormal(LogNormal<f64>),
}

impl ServiceSampler {
    pub fn new(params: &ModelParams) -> Self {
        let mu = params.mu;
        let cs2 = params.cs2;
        match params.service_law {
            ServiceLaw::Exponential => ServiceSampler::Exponential(Exp::new(mu).expect("mu > 0")),
            ServiceLaw::Deterministic => ServiceSampler::Deterministic(1.0 / mu),
            ServiceLaw::Gamma => {
                let (shape, scale) = gamma_shape_scale(mu, cs2);
                ServiceSampler::Gamma(Gamma::new(shape, scale).expect("cs2 > 0"))
            }
            ServiceLaw::Lognormal => {
                let (m, s) = lognormal_log_moments(mu, cs2);
                ServiceSampler::Lognormal(LogNormal::new(m, s).expect("cs2 > 0"))
            }
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        match self {
            ServiceSampler::Exponential(d) => (0..count).map(|_| d.sample(rng)).collect(),
            ServiceSampler::Deterministic(v) => vec![*v; count],
            ServiceSampler::Gamma(d) => (0..count).map(|_| d.sample(rng)).collect(),
            ServiceSampler::Lognormal(d) => (0..count).map(|_| d.sample(rng)).collect(),
        }
    }
}

/// Gamma `(shape, scale)` with mean `1/mu` and squared CV `cs2`.
pub fn gamma_shape_scale(mu: f64, cs2: f64) -> (f64, f64) {
    (1.0 / cs2, cs2 / mu)
}

/// Mean and standard deviation of `ln(nu)` for a lognormal with mean `1/mu`
/// and squared CV `cs2`.
pub fn lognormal_log_moments(mu: f64, cs2: f64) -> (f64, f64) {
    let v = cs2.ln_1p();
    ((1.0 / mu).ln() - v / 2.0, v.sqrt())
}

/// Non-decreasing appointment times inside `[0, H]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    times: Vec<f64>,
}

impl Schedule {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 || t > horizon {
                return Err(Error::domain(format!(
                    "appointment {} at {} lies outside [0, {}]",
                    i + 1,
                    t,
                    horizon
                )));
            }
        }
        if let Some(i) = times.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::domain(format!(
                "appointments {} and {} are out of order",
                i + 1,
                i + 2
            )));
        }
        Ok(Schedule { times })
    }

    pub(crate) fn from_sorted(times: Vec<f64>) -> Self {
        debug_assert!(times.windows(2).all(|w| w[0] <= w[1]));
        Schedule { times }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Scheduling function `E(t) = #{i : T_i <= t}`.
    pub fn count_until(&self, t: f64) -> usize {
        self.times.partition_point(|&x| x <= t)
    }

    /// One time per line, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.times.len() * 24);
        for &t in &self.times {
            writeln!(out, "{}", sig17(t)).expect("write to String");
        }
        out
    }

    /// Reads the [`Schedule::to_csv`] format. Blank lines and `#` comments
    /// are skipped.
    pub fn from_csv<R: BufRead>(reader: R, horizon: f64) -> Result<Self> {
        let mut times = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let s = line.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let t: f64 = s.parse().map_err(|_| {
                Error::Config(format!(
                    "schedule line {}: cannot parse {:?}",
                    lineno + 1,
                    s
                ))
            })?;
            times.push(t);
        }
        Schedule::new(times, horizon)
    }
}

/// One draw of the stochastic primitives.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    shows: Vec<bool>,
    services: Vec<f64>,
}

impl Realization {
    /// `shows[i]` is the show flag of appointment slot `i`; `services[k]` is
    /// the raw (unscaled) service time of the `k`-th job served.
    pub fn new(shows: Vec<bool>, services: Vec<f64>) -> Result<Self> {
        let k = shows.iter().filter(|&&s| s).count();
        if services.len() < k {
            return Err(Error::SizeMismatch {
                expected: k,
                found: services.len(),
            });
        }
        if services.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::domain("service times must be positive and finite"));
        }
        Ok(Realization { shows, services })
    }

    pub fn shows(&self) -> &[bool] {
        &self.shows
    }

    pub fn services(&self) -> &[f64] {
        &self.services
    }

    pub fn shows_count(&self) -> usize {
        self.shows.iter().filter(|&&s| s).count()
    }

    pub(crate) fn check_population(&self, population: usize) -> Result<()> {
        if self.shows.len() != population {
            return Err(Error::SizeMismatch {
                expected: population,
                found: self.shows.len(),
            });
        }
        Ok(())
    }
}

/// Exact performance of one schedule on one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    /// Total queueing delay of all show-ups (service excluded).
    pub makespan_w: f64,
    /// `(tau - H)^+`.
    pub overage_o: f64,
    /// Departure of the last show-up; 0 when nobody shows.
    pub tau: f64,
    /// Server idle time in `[0, tau]`.
    pub idle: f64,
    pub shows_count: usize,
    pub per_job_waits: Vec<f64>,
}
