use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, Schedule, SystemInstance};
use crate::schedules::{self, DriftRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    #[default]
    Fluid,
    Diffusion,
    DiffusionLegacy,
    Uniform,
    File,
}

/// One experiment. `n_list`, `reps` and `seed` drive the simulation
/// subcommands; `betas`, `horizons`, `t_list` and `sigma` are only read by
/// `bop` and `rbm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub n_list: Vec<u64>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub schedule_kind: ScheduleKind,
    /// Brownian grid step; defaults to `H / 2^14`.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Schedule times, one per line, for `schedule_kind = "file"`.
    #[serde(default)]
    pub schedule_file: Option<PathBuf>,
    /// Drifts for `bop` and `rbm`; defaults to the optimal drift.
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
    /// Horizons for `bop`; defaults to the model horizon.
    #[serde(default)]
    pub horizons: Option<Vec<f64>>,
    /// Times for `rbm`; defaults to the model horizon.
    #[serde(default)]
    pub t_list: Option<Vec<f64>>,
    /// Overrides the diffusion coefficient in `bop` and `rbm`.
    #[serde(default)]
    pub sigma: Option<f64>,
}

impl ExperimentConfig {
    /// Reads TOML, or JSON when the extension is `.json`. Relative
    /// `schedule_file` paths resolve against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {}", path.display(), e)))?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let mut cfg = if is_json {
            Self::from_json_str(&text)?
        } else {
            Self::from_toml_str(&text)?
        };
        if let (Some(file), Some(dir)) = (&cfg.schedule_file, path.parent()) {
            if file.is_relative() {
                cfg.schedule_file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str::<Self>(s)
            .map_err(|e| Error::Config(e.to_string()))?
            .validate()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str::<Self>(s)
            .map_err(|e| Error::Config(e.to_string()))?
            .validate()
    }

    pub fn validate(mut self) -> Result<Self> {
        self.params = self.params.validate()?;
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list must not be empty".into()));
        }
        if self.n_list.contains(&0) {
            return Err(Error::Config("n_list entries must be positive".into()));
        }
        if self.n_list.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config("n_list must be sorted".into()));
        }
        if self.reps < 2 {
            return Err(Error::Config(format!(
                "reps must be at least 2, got {}",
                self.reps
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::Config("dt must be positive".into()));
            }
        }
        if self.schedule_kind == ScheduleKind::File && self.schedule_file.is_none() {
            return Err(Error::Config(
                "schedule_kind = \"file\" needs schedule_file".into(),
            ));
        }
        let finite =
            |v: &Option<Vec<f64>>| v.as_ref().is_none_or(|xs| xs.iter().all(|x| x.is_finite()));
        if !finite(&self.betas) || !finite(&self.horizons) || !finite(&self.t_list) {
            return Err(Error::Config(
                "betas, horizons and t_list must be finite".into(),
            ));
        }
        for (name, list) in [
            ("betas", &self.betas),
            ("horizons", &self.horizons),
            ("t_list", &self.t_list),
        ] {
            if list.as_ref().is_some_and(|xs| xs.is_empty()) {
                return Err(Error::Config(format!("{} must not be empty", name)));
            }
        }
        if self
            .horizons
            .as_ref()
            .is_some_and(|hs| hs.iter().any(|&h| h <= 0.0))
        {
            return Err(Error::Config("horizons must be positive".into()));
        }
        if self
            .t_list
            .as_ref()
            .is_some_and(|ts| ts.iter().any(|&t| t <= 0.0))
        {
            return Err(Error::Config("t_list entries must be positive".into()));
        }
        if self.sigma.is_some_and(|s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::Config("sigma must be non-negative".into()));
        }
        Ok(self)
    }

    /// Grid step for horizon `h`.
    pub fn dt_for(&self, h: f64) -> f64 {
        self.dt.unwrap_or(h / 16384.0)
    }

    /// Builds the configured schedule for the `n`-th system.
    pub fn schedule(&self, instance: &SystemInstance) -> Result<Schedule> {
        match self.schedule_kind {
            ScheduleKind::Fluid => Ok(schedules::fluid_schedule(instance)),
            ScheduleKind::Diffusion => schedules::diffusion_schedule(instance, DriftRule::Optimal),
            ScheduleKind::DiffusionLegacy => {
                schedules::diffusion_schedule(instance, DriftRule::Legacy)
            }
            ScheduleKind::Uniform => Ok(schedules::uniform_schedule(instance)),
            ScheduleKind::File => {
                let path = self.schedule_file.as_ref().expect("checked in validate");
                let file = std::fs::File::open(path)
                    .map_err(|e| Error::Config(format!("cannot open {}: {}", path.display(), e)))?;
                Schedule::from_csv(std::io::BufReader::new(file), instance.params.horizon)
            }
        }
    }

    /// Linear drift whose Brownian cost the configured schedule approaches,
    /// if it is a linear-drift schedule.
    pub fn schedule_drift(&self) -> Result<Option<f64>> {
        Ok(match self.schedule_kind {
            ScheduleKind::Fluid => Some(0.0),
            ScheduleKind::Diffusion => Some(schedules::diffusion_drift(
                &self.params,
                DriftRule::Optimal,
            )?),
            ScheduleKind::DiffusionLegacy => {
                Some(schedules::diffusion_drift(&self.params, DriftRule::Legacy)?)
            }
            ScheduleKind::Uniform | ScheduleKind::File => None,
        })
    }
}
