//! Batch experiment driver. Each subcommand reads an [`ExperimentConfig`]
//! and writes one CSV table.

mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

pub use config::{ExperimentConfig, ScheduleKind};

use crate::analytics::{self, BopCoefficients};
use crate::bop::{bop_cost_mc, PiecewiseLinearControl};
use crate::error::{Error, Result};
use crate::fmt::sig17;
use crate::model::SystemInstance;
use crate::montecarlo::{self, RngPolicy};
use crate::qsim::simulate;

#[derive(Debug, Parser)]
#[command(
    name = "noshow-sched",
    version,
    about = "Appointment scheduling with no-shows: convergence experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment config (TOML, or JSON with a .json extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output CSV; overrides `out` in the config. Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads. Changes speed, never results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Omit the timestamp line so reruns are byte-identical.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Cost of the configured schedule against the fluid value.
    FluidConv,
    /// Centered, scaled cost against the linear-drift Brownian cost.
    DiffConv,
    /// Stochasticity gap with common random numbers.
    Sg,
    /// Brownian cost of linear controls: Monte Carlo against quadrature.
    Bop,
    /// Mean of reflected Brownian motion against its stationary mean.
    Rbm,
    /// Complete-information cost.
    Ci,
    /// One realization of the configured schedule.
    Simulate,
}

impl Command {
    pub fn header(self) -> &'static str {
        match self {
            Command::FluidConv => "n,cost_mean,cost_stderr,v_bar,gap",
            Command::DiffConv => "n,H,hatJ_mean,hatJ_stderr,bop_linear_cost,v_star",
            Command::Sg => "n,sg_mean,sg_stderr",
            Command::Bop => "beta,H,mc_mean,mc_stderr,quadrature",
            Command::Rbm => "t,beta,sigma,mean,stationary_mean",
            Command::Ci => "n,ci_cost_mean,ci_cost_stderr,v_bar",
            Command::Simulate => "n,shows,makespan,overage,tau,idle,cost",
        }
    }
}

fn row(out: &mut String, fields: &[String]) {
    writeln!(out, "{}", fields.join(",")).expect("write to String");
}

fn instances(cfg: &ExperimentConfig) -> impl Iterator<Item = Result<SystemInstance>> + '_ {
    cfg.n_list
        .iter()
        .map(|&n| SystemInstance::new(cfg.params.clone(), n))
}

/// Runs one subcommand and returns the CSV table, header included.
pub fn run_command(command: Command, cfg: &ExperimentConfig) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "{}", command.header()).expect("write to String");
    let rng = RngPolicy::new(cfg.seed);
    match command {
        Command::FluidConv => {
            let v_bar = analytics::fluid_summary(&cfg.params)?.v_bar;
            for inst in instances(cfg) {
                let inst = inst?;
                let est = montecarlo::estimate_cost(&inst, &cfg.schedule(&inst)?, cfg.reps, &rng)?;
                row(
                    &mut out,
                    &[
                        inst.n.to_string(),
                        sig17(est.mean),
                        sig17(est.stderr),
                        sig17(v_bar),
                        sig17(est.mean - v_bar),
                    ],
                );
            }
        }
        Command::DiffConv => {
            let h = cfg.params.horizon;
            let v_star = analytics::diffusion_constants(&cfg.params)?.v_star;
            let bop = match cfg.schedule_drift()? {
                Some(beta) => analytics::linear_bop_cost(beta, h, &cfg.params)?,
                None => f64::NAN,
            };
            for inst in instances(cfg) {
                let inst = inst?;
                let est = montecarlo::estimate_cost(&inst, &cfg.schedule(&inst)?, cfg.reps, &rng)?;
                let hat = montecarlo::scaled_diffusion_cost(&est, &cfg.params, inst.n)?
                    .affine(0.0, 1.0 / h);
                row(
                    &mut out,
                    &[
                        inst.n.to_string(),
                        sig17(h),
                        sig17(hat.mean),
                        sig17(hat.stderr),
                        sig17(bop),
                        sig17(v_star),
                    ],
                );
            }
        }
        Command::Sg => {
            for inst in instances(cfg) {
                let inst = inst?;
                let est = montecarlo::estimate_sg(&inst, &cfg.schedule(&inst)?, cfg.reps, &rng)?;
                row(
                    &mut out,
                    &[inst.n.to_string(), sig17(est.mean), sig17(est.stderr)],
                );
            }
        }
        Command::Bop => {
            let mut coeffs = BopCoefficients::from_params(&cfg.params)?;
            if let Some(sigma) = cfg.sigma {
                coeffs = coeffs.with_sigma(sigma);
            }
            let betas = match &cfg.betas {
                Some(b) => b.clone(),
                None => vec![analytics::diffusion_constants(&cfg.params)?.beta_star],
            };
            let horizons = cfg
                .horizons
                .clone()
                .unwrap_or_else(|| vec![cfg.params.horizon]);
            for &beta in &betas {
                for &h in &horizons {
                    let control = PiecewiseLinearControl::linear(beta, h)?;
                    let est = bop_cost_mc(&control, &coeffs, cfg.dt_for(h), cfg.reps, &rng)?;
                    let quad = coeffs.linear_cost(beta, h)?;
                    row(
                        &mut out,
                        &[
                            sig17(beta),
                            sig17(h),
                            sig17(est.mean),
                            sig17(est.stderr),
                            sig17(quad),
                        ],
                    );
                }
            }
        }
        Command::Rbm => {
            let sigma = match cfg.sigma {
                Some(s) => s,
                None => BopCoefficients::from_params(&cfg.params)?.sigma,
            };
            let betas = match &cfg.betas {
                Some(b) => b.clone(),
                None => vec![analytics::diffusion_constants(&cfg.params)?.beta_star],
            };
            let times = cfg
                .t_list
                .clone()
                .unwrap_or_else(|| vec![cfg.params.horizon]);
            for &t in &times {
                for &beta in &betas {
                    let mean = analytics::rbm_mean(t, beta, sigma)?;
                    let stationary = if beta < 0.0 {
                        analytics::rbm_stationary_mean(beta, sigma)?
                    } else {
                        f64::INFINITY
                    };
                    row(
                        &mut out,
                        &[
                            sig17(t),
                            sig17(beta),
                            sig17(sigma),
                            sig17(mean),
                            sig17(stationary),
                        ],
                    );
                }
            }
        }
        Command::Ci => {
            let v_bar = analytics::fluid_summary(&cfg.params)?.v_bar;
            for inst in instances(cfg) {
                let inst = inst?;
                let est = montecarlo::estimate_ci_cost(&inst, cfg.reps, &rng)?;
                row(
                    &mut out,
                    &[
                        inst.n.to_string(),
                        sig17(est.mean),
                        sig17(est.stderr),
                        sig17(v_bar),
                    ],
                );
            }
        }
        Command::Simulate => {
            for inst in instances(cfg) {
                let inst = inst?;
                let schedule = cfg.schedule(&inst)?;
                let realization = inst.sample_realization(&mut rng.substream(1));
                let o = simulate(&inst, &schedule, &realization)?;
                let cost = inst.cw_n * o.makespan_w + inst.co_n * o.overage_o;
                row(
                    &mut out,
                    &[
                        inst.n.to_string(),
                        o.shows_count.to_string(),
                        sig17(o.makespan_w),
                        sig17(o.overage_o),
                        sig17(o.tau),
                        sig17(o.idle),
                        sig17(cost),
                    ],
                );
            }
        }
    }
    Ok(out)
}

fn execute(cli: &Cli) -> Result<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let cfg = ExperimentConfig::load(path)?;
    let table = match cli.threads {
        Some(0) => return Err(Error::Config("--threads must be positive".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| run_command(cli.command, &cfg))?,
        None => run_command(cli.command, &cfg)?,
    };
    let mut text = String::new();
    if !cli.deterministic {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        writeln!(text, "# generated_at_unix={}", secs).expect("write to String");
    }
    text.push_str(&table);
    match cli.out.as_ref().or(cfg.out.as_ref()) {
        Some(dest) => std::fs::write(dest, text)?,
        None => print!("{}", text),
    }
    Ok(())
}

/// Exit code: 0 on success, 2 for config or domain errors, 3 for numerical
/// failures.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

/// Entry point of the binary.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("noshow-sched: {}", e);
            exit_code(&e)
        }
    }
}
