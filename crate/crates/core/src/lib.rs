//! Appointment scheduling for a single-server queue with no-shows.
//!
//! The crate covers the whole pipeline from model primitives to asymptotic
//! checks:
//!
//! * [`model`]: parameters, the `n`-th scaled system, schedules and realizations.
//! * [`qsim`]: exact FCFS evaluation of a schedule against one realization.
//! * [`schedules`]: fluid, linear-drift (diffusion) and baseline schedules.
//! * [`oracle`]: the complete-information solution, pathwise.
//! * [`analytics`]: fluid value, diffusion constants, reflected Brownian
//!   motion laws and the linear-control Brownian cost by quadrature.
//! * [`bop`]: grid Skorohod map and Monte-Carlo Brownian control costs.
//! * [`montecarlo`]: reproducible parallel estimators, including the
//!   stochasticity gap with common random numbers.
//! * [`cli`]: the batch experiment driver behind the `noshow-sched` binary.

// Negated comparisons below deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod bop;
pub mod cli;
mod error;
pub mod fmt;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod qsim;
pub mod schedules;

pub use error::{Error, Result};
pub use model::{ModelParams, Realization, Schedule, ServiceLaw, SimOutcome, SystemInstance};
pub use montecarlo::{Estimate, RngPolicy};
